"""
Channel estimators: pseudo-random baseline, cross method, incidence method.

All three read peaks off the ambiguity function of the probe against the
echo. The pseudo-random method scans the whole N x N plane; the chirp methods
look only at a few lines through the origin and then solve a small matching
problem among the peaks, which is what brings the cost down to
``O(N log N + r^2)`` (cross) and ``O(N log N + r^3)`` (incidence).

Thresholds
----------
Under noise, a peak must clear ``T * sqrt(2 ln ln N) / sqrt(N * SNR)``. The
chirp components of a multi-chirp probe also leak into each other's slices
with magnitude ``1/sqrt(N)`` per path and component, and that leakage does
not vanish in noiseless runs. The estimators therefore never threshold below
a leakage floor computed from the echo energy (:func:`leakage_bar`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .ambiguity import (AmbiguitySlice, ambiguity_full_fast, ambiguity_on_line_fast, ambiguity_point,
                        chirp_cross_ambiguity)
from .channel import ChannelSpec, PathParam, apply_channel, apply_paths, noise_envelope
from .dft import OpCounter
from .plane import (AffineLine, Line, ModulusContext, PlanePoint, PlaneError, coset_key,
                    decompose, on_line, symplectic, unit_root)
from .sequences import (Character, ChirpSpec, SameLineError, Sequence, chirp, chirp_character,
                        make_rng, multi_chirp)

NOISELESS = math.inf
DEFAULT_PAIR_CAP = 10_000
DEFAULT_PASSES = 4
# cost charged per evaluation of the hypothesis function and per incidence test
H_EVAL_OPS = 8
INCIDENCE_TEST_OPS = 4


class Method(enum.Enum):
    PR = "PR"
    CROSS = "CROSS"
    INCIDENCE = "INCIDENCE"


class CalibrationFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class Thresholds:
    """Peak and hypothesis factors plus the SNR the receiver assumes.

    ``T`` serves the incidence and pseudo-random methods, ``T1``/``T2`` the
    cross method. ``leak`` scales the leakage floor; ``snr_hint = inf``
    marks a noiseless run.
    """

    T: float = 3.0
    T1: float = 3.0
    T2: float = 3.0
    snr_hint: float = NOISELESS
    leak: float = 1.25

    def __post_init__(self):
        for name in ("T", "T1", "T2", "snr_hint", "leak"):
            if not getattr(self, name) > 0:
                raise ValueError(f"threshold {name} must be positive")


@dataclass
class PeakList:
    line: AffineLine
    entries: list[tuple[PlanePoint, complex]]
    bar: float

    @property
    def points(self) -> list[PlanePoint]:
        return [p for p, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class EstimateReport:
    method: Method
    paths: list[PathParam]
    thresholds: Thresholds
    op_count: int
    diagnostics: dict = field(default_factory=dict)

    def points(self) -> list[PlanePoint]:
        return [p.point for p in self.paths]

    @property
    def flags(self) -> list[str]:
        return self.diagnostics.setdefault("flags", [])


# -- thresholds -------------------------------------------------------------

def peak_bar(ctx: ModulusContext, factor: float, snr: float) -> float:
    """``factor * sqrt(2 ln ln N) / sqrt(N snr)``; a tiny absolute floor if noiseless."""
    if math.isinf(snr):
        if ctx.N < 16:
            raise ValueError(f"peak bar needs N >= 16, got {ctx.N}")
        return 10 * np.finfo(float).eps * math.sqrt(ctx.N)
    return factor * noise_envelope(ctx, snr)


def leakage_bar(R: Sequence, components: int, cells: int, factor: float) -> float:
    """Floor above the cross-component leakage of a ``components``-chirp probe.

    Off-peak ambiguity values behave like a random sum with mean square
    ``((K-1)/K) |R|^2 / N``; the floor is ``factor`` times that rms times
    ``sqrt(ln cells)``, the typical maximum over the scanned cells. The
    pseudo-random probe is passed with ``components=0`` and uses the full
    echo energy.
    """
    frac = 1.0 if components <= 1 else (components - 1) / components
    rms = math.sqrt(frac * R.norm_sq() / R.N)
    return factor * rms * math.sqrt(math.log(max(cells, 2)))


def detect_peaks(slice_: AmbiguitySlice, bar: float, counter: OpCounter | None = None) -> PeakList:
    """Points with ``|value| >= bar``, strongest first, ties by line position."""
    mag = np.abs(slice_.values)
    if counter is not None:
        counter.add(mag.shape[0], "peaks")
    idx = np.flatnonzero(mag >= bar)
    order = idx[np.lexsort((idx, -mag[idx]))]
    line = slice_.line
    return PeakList(line, [(line.point(int(k)), complex(slice_.values[k])) for k in order], bar)


# -- phase conventions ------------------------------------------------------

@dataclass(frozen=True)
class PhaseConvention:
    """How a raw ambiguity value turns into an attenuation estimate.

    ``alpha = op(raw) * psi_L(l)**psi_power * e((omega_coef*Omega[l, m] + heis_coef*tau*omega)/2)``
    with ``op`` complex conjugation when ``conj`` is set and ``(tau, omega) = l + m``.
    """

    conj: bool
    psi_power: int = 0
    omega_coef: int = 0
    heis_coef: int = 0

    def apply(self, ctx: ModulusContext, raw: complex, v: PlanePoint,
              l: PlanePoint | None = None, m: PlanePoint | None = None,
              psi: Character | None = None) -> complex:
        z = np.conj(raw) if self.conj else raw
        expo = self.heis_coef * ctx.half_inv * v.tau * v.omega
        if self.omega_coef:
            expo += self.omega_coef * ctx.half_inv * symplectic(ctx, l, m)
        if self.psi_power:
            expo += self.psi_power * psi.exponent(l)
        return complex(z * unit_root(ctx, expo % ctx.N))


def _family(method: Method) -> list[PhaseConvention]:
    if method is Method.PR:
        return [PhaseConvention(c, 0, 0, h) for c in (False, True) for h in (0, 1, -1)]
    return [PhaseConvention(c, s, o, h)
            for c in (False, True) for s in (1, -1) for o in (0, 1, -1) for h in (0, 1, -1)]


CALIBRATION_ALPHA = complex(np.exp(0.7j))
CALIBRATION_DRAWS = 8


def _calibration_raw(ctx: ModulusContext, method: Method, specs: tuple[ChirpSpec, ...],
                     probe: Sequence, v: PlanePoint):
    R = apply_channel(ChannelSpec(ctx, (PathParam(CALIBRATION_ALPHA, v.tau, v.omega),)), probe)
    if method is Method.PR:
        return ambiguity_point(probe, R, v), None, None
    L, M = specs[0], specs[1]
    l, m = decompose(ctx, v, L.line, M.line)
    raw = math.sqrt(len(specs)) * ambiguity_point(chirp(ctx, L), R, m)
    return raw, l, m


def calibration_scores(ctx: ModulusContext, method: Method, specs: tuple[ChirpSpec, ...] = (),
                       probe: Sequence | None = None, seed: int = 0) -> dict[PhaseConvention, float]:
    """Worst-case calibration error of every candidate convention."""
    if method is not Method.PR:
        probe = multi_chirp(ctx, list(specs))
    rng = make_rng(seed)
    psi = chirp_character(ctx, specs[0]) if specs else None
    errors = {conv: 0.0 for conv in _family(method)}
    draws = 0
    while draws < CALIBRATION_DRAWS:
        v = ctx.point(*rng.integers(0, ctx.N, size=2))
        if specs and any(on_line(ctx, s.line, v) for s in specs):
            continue
        raw, l, m = _calibration_raw(ctx, method, specs, probe, v)
        for conv in errors:
            err = abs(conv.apply(ctx, raw, v, l, m, psi) - CALIBRATION_ALPHA)
            errors[conv] = max(errors[conv], err)
        draws += 1
    return errors


def calibrate_phase(ctx: ModulusContext, method: Method, specs: tuple[ChirpSpec, ...] = (),
                    probe: Sequence | None = None, seed: int = 0) -> PhaseConvention:
    """Pick the attenuation convention that reproduces a known synthetic path.

    A noiseless single path with unit-modulus, non-real attenuation is pushed
    through the probe at a few random delay-Doppler points. The candidate
    with the smallest worst-case error wins, provided it is within
    ``3/sqrt(N)``; exact ties go to the earlier candidate in a fixed order.
    """
    tol = 3 / math.sqrt(ctx.N)
    scores = calibration_scores(ctx, method, tuple(specs), probe, seed)
    best = min(scores, key=scores.get)
    if scores[best] > tol:
        raise CalibrationFailed(f"no phase convention within {tol:.3g} for {method.value}")
    return best


@lru_cache(maxsize=256)
def _cached_convention(N: int, method: Method, specs: tuple[ChirpSpec, ...]) -> PhaseConvention:
    return calibrate_phase(ModulusContext(N), method, specs)


# -- hypothesis function ----------------------------------------------------

def hypothesis(ctx: ModulusContext, l: PlanePoint, m: PlanePoint,
               A_L_on_M: AmbiguitySlice, A_M_on_L: AmbiguitySlice,
               psi_L: Character, psi_M: Character) -> complex:
    """``A(C_L, R)[m] psi_L(l) - A(C_M, R)[l] e(Omega[l, m]) psi_M(m)``.

    ``A_L_on_M`` is the slice of A(C_L, R) along M and ``A_M_on_L`` that of
    A(C_M, R) along L. Vanishes (up to leakage) when ``l + m`` is a path.
    """
    if not on_line(ctx, psi_L.line, l):
        raise PlaneError(f"{tuple(l)} is not on {psi_L.line!r}")
    if not on_line(ctx, psi_M.line, m):
        raise PlaneError(f"{tuple(m)} is not on {psi_M.line!r}")
    first = A_L_on_M.at(m) * psi_L(l)
    second = A_M_on_L.at(l) * unit_root(ctx, symplectic(ctx, l, m)) * psi_M(m)
    return first - second


def _h_matrix(ctx, A_L_vals, A_M_vals, ls, ms, psi_L, psi_M, counter) -> np.ndarray:
    """h over the peak grid, from the peak values already in hand."""
    H = np.empty((len(ls), len(ms)), dtype=np.complex128)
    for i, (l, a_m_l) in enumerate(zip(ls, A_M_vals)):
        pl = psi_L(l)
        for j, (m, a_l_m) in enumerate(zip(ms, A_L_vals)):
            H[i, j] = a_l_m * pl - a_m_l * unit_root(ctx, symplectic(ctx, l, m)) * psi_M(m)
    counter.add(H_EVAL_OPS * H.size, "matching")
    return H


# -- matching rules -----------------------------------------------------------

def mutual_best_pairs(score: np.ndarray, bar: float, counter: OpCounter | None = None) -> list[tuple[int, int]]:
    """Pairs (i, j) whose score is the row minimum, the column minimum and <= bar.

    Each row and column is used at most once, which is what the true pairs
    look like when no two paths share a projection.
    """
    if score.size == 0:
        return []
    if counter is not None:
        counter.add(2 * score.size, "matching")
    row_best = np.argmin(score, axis=1)
    col_best = np.argmin(score, axis=0)
    return [(i, int(j)) for i, j in enumerate(row_best)
            if col_best[j] == i and score[i, j] <= bar]


def min_cost_assignment(cost: np.ndarray, counter: OpCounter | None = None) -> list[tuple[int, int]]:
    """One-to-one pairing of rows and columns with the least total cost.

    Shortest augmenting paths with dual potentials (the Hungarian method),
    so rectangular inputs pair ``min(rows, cols)`` entries. The counter is
    charged for the work actually done: each scan over the free columns
    costs three operations per column. On a cost matrix whose optimum is
    clearly separated each row augments in one or two scans, i.e.
    ``O(rows * cols)``; the worst case is cubic.
    """
    cost = np.asarray(cost, dtype=float)
    if cost.size == 0:
        return []
    if cost.shape[0] > cost.shape[1]:
        return sorted((i, j) for j, i in min_cost_assignment(cost.T, counter))
    n, m = cost.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    owner = np.zeros(m + 1, dtype=np.int64)     # row (1-based) assigned to column j, 0 if free
    way = np.zeros(m + 1, dtype=np.int64)
    scans = 0
    for i in range(1, n + 1):
        owner[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = owner[j0]
            free = ~used[1:]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[owner[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            scans += 1
            j0 = j1
            if owner[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            owner[j0] = owner[j1]
            j0 = j1
    if counter is not None:
        counter.add(3 * (m + 1) * scans, "matching")
    return sorted((int(owner[j]) - 1, j - 1) for j in range(1, m + 1) if owner[j])


MATCHING_RULES = ("assignment", "mutual", "all")


def _match(score: np.ndarray, bar: float, rule: str, counter: OpCounter) -> list[tuple[int, int]]:
    if rule == "all":
        return [(int(i), int(j)) for i, j in zip(*np.nonzero(score <= bar))]
    if rule == "mutual":
        return mutual_best_pairs(score, bar, counter)
    if rule == "assignment":
        return [(i, j) for i, j in min_cost_assignment(score, counter) if score[i, j] <= bar]
    raise ValueError(f"unknown matching rule {rule!r}; expected one of {MATCHING_RULES}")


# -- estimators ---------------------------------------------------------------

def _finish(method, ctx, found, thresholds, counter, diagnostics) -> EstimateReport:
    found.sort(key=lambda p: (p.tau, p.omega))
    uniq, seen = [], set()
    for p in found:
        if p.point not in seen:
            seen.add(p.point)
            uniq.append(p)
    return EstimateReport(method, uniq, thresholds, counter.total,
                          {**diagnostics, "op_stages": dict(counter.stages)})


def pr_method(phi: Sequence, R: Sequence, thresholds: Thresholds = Thresholds(),
              convention: PhaseConvention | None = None) -> EstimateReport:
    """Peaks of the full ambiguity function of a pseudo-random probe."""
    ctx = phi.ctx
    counter = OpCounter()
    A = ambiguity_full_fast(phi, R, counter).values
    bar = max(peak_bar(ctx, thresholds.T, thresholds.snr_hint),
              leakage_bar(R, 0, ctx.N ** 2, thresholds.leak))
    mag = np.abs(A)
    counter.add(mag.size, "peaks")
    if convention is None:
        convention = calibrate_phase(ctx, Method.PR, probe=phi)
    found = []
    for tau, omega in zip(*np.nonzero(mag >= bar)):
        v = PlanePoint(int(tau), int(omega))
        found.append(PathParam(convention.apply(ctx, A[tau, omega], v), v.tau, v.omega))
    counter.add(4 * len(found), "attenuation")
    return _finish(Method.PR, ctx, found, thresholds, counter, {"bar": bar, "convention": convention})


class _ChirpEcho:
    """Echo of a multi-chirp probe, with the estimated cross terms removed.

    Slice ``A(C_k, R)`` along a line picks up, besides the peaks of the
    ``C_k`` component, the ``1/sqrt(N)``-sized cross terms of every other
    component. Given a provisional path list these cross terms are known:
    they are ``A(C_k, H_est(C_j)/sqrt(K))`` for ``j != k``. Each path moves
    the chirp-pair ambiguity ``A(C_k, C_j)`` by its shift, and that function
    has a closed form, so the cross terms cost O(N) per path and component
    while the DFT slices of ``R`` are computed once. The leakage floor is
    recomputed from the part of the echo the estimate does not explain.
    """

    def __init__(self, ctx: ModulusContext, specs, R: Sequence, counter: OpCounter):
        lines = [s.line for s in specs]
        if len(set(lines)) != len(lines):
            raise SameLineError("probe lines must be pairwise distinct")
        if R.ctx != ctx:
            raise ValueError(f"echo has N={R.N}, probe lines live in N={ctx.N}")
        self.ctx = ctx
        self.specs = tuple(specs)
        self.R = R
        self.counter = counter
        self.chirps = [chirp(ctx, s) for s in specs]
        self.probe = multi_chirp(ctx, list(specs))
        self._base = {}

    def _cross_terms(self, k: int, line: Line, paths) -> np.ndarray:
        # A(C_k, beta pi(v) C_j)[u] = conj(beta) e((tau_v u_w - w_v u_tau)/2) A(C_k, C_j)[u - v]
        ctx, N, h = self.ctx, self.ctx.N, self.ctx.half_inv
        pts = np.array(AffineLine(ctx, line).points(), dtype=np.int64)
        ut, uw = pts[:, 0], pts[:, 1]
        out = np.zeros(N, dtype=np.complex128)
        scale = 1 / math.sqrt(len(self.specs))
        for p in paths:
            beta = p.alpha * unit_root(ctx, (h * p.tau * p.omega) % N)
            turn = unit_root(ctx, (h * (p.tau * uw - p.omega * ut)) % N)
            pair = sum(chirp_cross_ambiguity(ctx, self.specs[k], s, ut - p.tau, uw - p.omega)
                       for j, s in enumerate(self.specs) if j != k)
            out += np.conj(beta) * scale * turn * pair
        self.counter.add(6 * N * len(paths) * (len(self.specs) - 1), "cancellation")
        return out

    def slice(self, k: int, line: Line, paths) -> AmbiguitySlice:
        if (k, line) not in self._base:
            self._base[k, line] = ambiguity_on_line_fast(
                self.chirps[k], self.R, AffineLine(self.ctx, line), self.counter)
        base = self._base[k, line]
        if not paths:
            return base
        return AmbiguitySlice(base.line, base.values - self._cross_terms(k, line, paths))

    def leakage_bar(self, paths, factor: float) -> float:
        resid = self.R
        if paths:
            resid = Sequence(self.ctx, self.R.values - apply_paths(paths, self.probe))
            self.counter.add(3 * self.ctx.N * len(paths), "cancellation")
        return leakage_bar(resid, len(self.specs), self.ctx.N, factor)


def _attenuations(ctx, pairs, ls, ms, A_L_vals, K, convention, psi_L, counter) -> list[PathParam]:
    found = []
    for i, j in pairs:
        v = ctx.add(ls[i], ms[j])
        raw = math.sqrt(K) * A_L_vals[j]
        found.append(PathParam(convention.apply(ctx, raw, v, ls[i], ms[j], psi_L), v.tau, v.omega))
    counter.add(6 * len(found), "attenuation")
    return found


def _same_support(a: list[PathParam], b: list[PathParam]) -> bool:
    return sorted(p.point for p in a) == sorted(p.point for p in b)


def cross_method(L_spec: ChirpSpec, M_spec: ChirpSpec, R: Sequence,
                 thresholds: Thresholds = Thresholds(), matching: str = "assignment",
                 passes: int = DEFAULT_PASSES, pair_cap: int = DEFAULT_PAIR_CAP,
                 convention: PhaseConvention | None = None) -> EstimateReport:
    """Estimate the channel from the echo of the double chirp ``C_{L,M}``.

    Parameters
    ----------
    matching : {"assignment", "mutual", "all"}
        How grid pairs are accepted once ``|h|`` is known. ``"all"`` takes
        every pair with ``|h|`` under the bar. ``"mutual"`` keeps a pair only
        when it is the best candidate for both its L-peak and its M-peak.
        ``"assignment"`` pairs peaks one-to-one with the smallest total
        ``|h|`` and then applies the bar.
    passes : int
        Maximum number of detect/match/estimate rounds. Every round after the
        first works on slices with the previous estimate's cross terms
        removed; rounds stop early once the recovered support repeats.
        ``passes=1`` is the plain single-shot algorithm.
    pair_cap : int
        Largest peak grid the quadratic stage will evaluate.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    ctx = R.ctx
    counter = OpCounter()
    echo = _ChirpEcho(ctx, (L_spec, M_spec), R, counter)
    L, M = L_spec.line, M_spec.line
    psi_L, psi_M = chirp_character(ctx, L_spec), chirp_character(ctx, M_spec)
    if convention is None:
        convention = _cached_convention(ctx.N, Method.CROSS, (L_spec, M_spec))
    snr = thresholds.snr_hint
    found = []
    for round_ in range(1, passes + 1):
        leak = echo.leakage_bar(found, thresholds.leak)
        bar1 = max(peak_bar(ctx, thresholds.T1, snr), leak)
        bar2 = max(peak_bar(ctx, thresholds.T2, snr), 2 * leak)
        peaks_l = detect_peaks(echo.slice(1, L, found), bar1, counter)    # A(C_M, R) on L
        peaks_m = detect_peaks(echo.slice(0, M, found), bar1, counter)    # A(C_L, R) on M
        diag = {"bar_peak": bar1, "bar_h": bar2, "passes": round_,
                "peaks": {"l": peaks_l, "m": peaks_m}}
        flags = diag["flags"] = []
        if len(peaks_l) != len(peaks_m):
            flags.append("peak_count_mismatch")
        if len(peaks_l) * len(peaks_m) > pair_cap:
            flags.append("cap_exceeded")
            return _finish(Method.CROSS, ctx, [], thresholds, counter, diag)

        ls, ms = peaks_l.points, peaks_m.points
        A_M_vals = [val for _, val in peaks_l.entries]
        A_L_vals = [val for _, val in peaks_m.entries]
        H = _h_matrix(ctx, A_L_vals, A_M_vals, ls, ms, psi_L, psi_M, counter)
        diag["h"] = H
        pairs = _match(np.abs(H), bar2, matching, counter)
        if len(pairs) < min(len(ls), len(ms)):
            flags.append("unmatched_peaks")
        previous = found
        found = _attenuations(ctx, pairs, ls, ms, A_L_vals, 2, convention, psi_L, counter)
        if not found or (round_ > 1 and _same_support(found, previous)):
            break
    return _finish(Method.CROSS, ctx, found, thresholds, counter, diag)


def incidence_match(ctx: ModulusContext, ls: list[PlanePoint], ms: list[PlanePoint],
                    los: list[PlanePoint], Mo: Line, indexed: bool = False,
                    counter: OpCounter | None = None) -> list[tuple[int, int]]:
    """All (i, j) with ``ls[i] + ms[j]`` on one of the cosets ``Mo + los[k]``.

    The default triple loop costs ``r1 r2 r3`` tests; ``indexed=True`` hashes
    the coset labels first for ``r1 r2 + r3`` with the same result.
    """
    pairs = []
    if indexed:
        keys = {coset_key(ctx, Mo, p) for p in los}
        for i, l in enumerate(ls):
            for j, m in enumerate(ms):
                if coset_key(ctx, Mo, ctx.add(l, m)) in keys:
                    pairs.append((i, j))
        if counter is not None:
            counter.add(INCIDENCE_TEST_OPS * (len(ls) * len(ms) + len(los)), "matching")
        return pairs
    lo_keys = [coset_key(ctx, Mo, p) for p in los]
    for i, l in enumerate(ls):
        for j, m in enumerate(ms):
            key = coset_key(ctx, Mo, ctx.add(l, m))
            if any(key == k for k in lo_keys):
                pairs.append((i, j))
    if counter is not None:
        counter.add(INCIDENCE_TEST_OPS * len(ls) * len(ms) * len(los), "matching")
    return pairs


def _conflicts(pairs) -> bool:
    return len(pairs) != len({i for i, _ in pairs}) or len(pairs) != len({j for _, j in pairs})


def _resolve_conflicts(ctx, pairs, ls, ms, A_L_vals, A_M_vals, psi_L, psi_M, counter):
    rows = [i for i, _ in pairs]
    cols = [j for _, j in pairs]
    shared = {i for i in rows if rows.count(i) > 1} | {("m", j) for j in cols if cols.count(j) > 1}
    keep = [(i, j) for i, j in pairs if i not in shared and ("m", j) not in shared]
    clash = [(i, j) for i, j in pairs if (i, j) not in keep]
    ri = sorted({i for i, _ in clash})
    cj = sorted({j for _, j in clash})
    H = _h_matrix(ctx, [A_L_vals[j] for j in cj], [A_M_vals[i] for i in ri],
                  [ls[i] for i in ri], [ms[j] for j in cj], psi_L, psi_M, counter)
    score = np.abs(H)
    allowed = np.zeros(score.shape, dtype=bool)
    for i, j in clash:
        allowed[ri.index(i), cj.index(j)] = True
    # pairs the incidence test rejected must never be chosen
    score[~allowed] = score.max() * 4 + 1
    chosen = [(ri[a], cj[b]) for a, b in min_cost_assignment(score, counter) if allowed[a, b]]
    return sorted(keep + chosen)


def incidence_method(L_spec: ChirpSpec, M_spec: ChirpSpec, Mo_spec: ChirpSpec, R: Sequence,
                     thresholds: Thresholds = Thresholds(), indexed: bool = False,
                     passes: int = DEFAULT_PASSES, resolve: bool = True,
                     convention: PhaseConvention | None = None) -> EstimateReport:
    """Estimate the channel from the echo of the triple chirp ``C_{L,M,Mo}``.

    ``passes`` works as in :func:`cross_method`: later rounds detect peaks
    on slices with the previous estimate's cross terms removed.

    A false pair ``l_i + m_j`` can land on a true ``Mo`` coset by accident;
    it then shares its L-peak and its M-peak with true pairs. With
    ``resolve`` set, such conflicting pairs are settled one-to-one by the
    smallest ``|h|``, using the L and M slices already computed. Pairs that
    conflict with nothing are kept as the incidence test found them.
    """
    if passes < 1:
        raise ValueError("passes must be >= 1")
    ctx = R.ctx
    counter = OpCounter()
    echo = _ChirpEcho(ctx, (L_spec, M_spec, Mo_spec), R, counter)
    L, M = L_spec.line, M_spec.line
    psi_L, psi_M = chirp_character(ctx, L_spec), chirp_character(ctx, M_spec)
    if convention is None:
        convention = _cached_convention(ctx.N, Method.INCIDENCE, (L_spec, M_spec, Mo_spec))
    found = []
    for round_ in range(1, passes + 1):
        bar = max(peak_bar(ctx, thresholds.T, thresholds.snr_hint),
                  echo.leakage_bar(found, thresholds.leak))
        peaks_l = detect_peaks(echo.slice(1, L, found), bar, counter)     # A(C_M, R) on L
        peaks_m = detect_peaks(echo.slice(0, M, found), bar, counter)     # A(C_L, R) on M
        peaks_lo = detect_peaks(echo.slice(2, L, found), bar, counter)    # A(C_Mo, R) on L
        diag = {"bar_peak": bar, "passes": round_,
                "peaks": {"l": peaks_l, "m": peaks_m, "lo": peaks_lo}}
        flags = diag["flags"] = []
        if not len(peaks_l) == len(peaks_m) == len(peaks_lo):
            flags.append("peak_count_mismatch")

        ls, ms = peaks_l.points, peaks_m.points
        A_M_vals = [val for _, val in peaks_l.entries]
        A_L_vals = [val for _, val in peaks_m.entries]
        pairs = incidence_match(ctx, ls, ms, peaks_lo.points, Mo_spec.line, indexed, counter)
        if _conflicts(pairs):
            flags.append("shared_projection")
            if resolve:
                pairs = _resolve_conflicts(ctx, pairs, ls, ms, A_L_vals, A_M_vals,
                                           psi_L, psi_M, counter)
        previous = found
        found = _attenuations(ctx, pairs, ls, ms, A_L_vals, 3, convention, psi_L, counter)
        if not found or (round_ > 1 and _same_support(found, previous)):
            break
    return _finish(Method.INCIDENCE, ctx, found, thresholds, counter, diag)


# -- report files -------------------------------------------------------------

def _num(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def format_report(report: EstimateReport) -> str:
    t = report.thresholds
    out = [f"method={report.method.value}",
           f"T={_num(t.T)} T1={_num(t.T1)} T2={_num(t.T2)} snr_hint={_num(t.snr_hint)} leak={_num(t.leak)}",
           f"op_count={report.op_count}",
           f"paths={len(report.paths)}"]
    for p in report.paths:
        out.append(f"{float(p.alpha.real)!r} {float(p.alpha.imag)!r} {p.tau} {p.omega}")
    out.append("diagnostics")
    d = report.diagnostics
    out.append("flags=" + ",".join(d.get("flags", [])))
    for key in ("bar", "bar_peak", "bar_h", "passes"):
        if key in d:
            out.append(f"{key}={_num(d[key])}")
    for name, pl in sorted(d.get("peaks", {}).items()):
        pts = " ".join(f"{p.tau}:{p.omega}" for p in pl.points)
        out.append(f"peaks_{name}={len(pl)} {pts}".rstrip())
    for stage, n in sorted(d.get("op_stages", {}).items()):
        out.append(f"ops_{stage}={n}")
    return "\n".join(out) + "\n"


def parse_report_paths(text: str) -> tuple[Method, list[PathParam]]:
    """Method and recovered paths from a report written by :func:`format_report`."""
    lines = text.splitlines()
    method = Method(lines[0].split("=", 1)[1])
    count = int(lines[3].split("=", 1)[1])
    paths = []
    for row in lines[4:4 + count]:
        re_, im_, tau, omega = row.split()
        paths.append(PathParam(complex(float(re_), float(im_)), int(tau), int(omega)))
    return method, paths
