"""
Heisenberg operators and the ambiguity function on Z_N x Z_N.

    [pi(tau, w) f][n] = e(-tau*w/2) e(w*n) f[n - tau]
    A(f, g)[tau, w]   = <pi(tau, w) f, g>,    <x, y> = sum x[n] conj(y[n])

Restriction to an affine line ``u0 + L`` costs three length-N DFTs:

* ``pi(u0 + l) = e(Omega[u0, l]/2) pi(u0) pi(l)`` moves the anchor onto ``g``;
* the shear ``(M_a h)[n] = e(a n^2/2) h[n]`` maps ``L_a`` onto the delay axis,
  where the ambiguity function is a cyclic cross-correlation;
* on the Doppler axis it is a single DFT of ``f * conj(g)``.

Between two chirps on distinct lines the ambiguity function also has a
closed form (a quadratic Gauss sum), evaluated pointwise without DFTs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dft import NULL_COUNTER, OpCounter, dft
from .plane import (INFINITY, AffineLine, Line, ModulusContext, PlanePoint,
                    line_points, unit_root)
from .sequences import ChirpSpec, Sequence

DEFAULT_ORACLE_CAP = 257


class OracleCapExceeded(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class AmbiguitySlice:
    """Values of A(f, g) at ``line.point(k)`` for k = 0..N-1."""

    line: AffineLine
    values: np.ndarray

    def at(self, p: PlanePoint) -> complex:
        return complex(self.values[self.line.index_of(p)])

    def points(self) -> list[PlanePoint]:
        return self.line.points()


@dataclass(frozen=True, eq=False)
class AmbiguityMatrix:
    """Full N x N ambiguity function; rows are delay, columns Doppler."""

    values: np.ndarray

    @property
    def N(self) -> int:
        return self.values.shape[0]

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def _check_pair(f: Sequence, g: Sequence) -> None:
    if f.ctx != g.ctx:
        raise ValueError(f"length mismatch: N={f.N} vs N={g.N}")


def _heis(ctx: ModulusContext, tau: int, omega: int, x: np.ndarray) -> np.ndarray:
    n = np.arange(ctx.N, dtype=np.int64)
    phase = unit_root(ctx, (-ctx.half_inv * tau * omega + omega * n) % ctx.N)
    return phase * np.roll(x, tau)


def heisenberg_apply(p: PlanePoint, f: Sequence) -> Sequence:
    ctx = f.ctx
    p = ctx.point(*p)
    return Sequence(ctx, _heis(ctx, p.tau, p.omega, f.values))


def ambiguity_point(f: Sequence, g: Sequence, p: PlanePoint) -> complex:
    _check_pair(f, g)
    return heisenberg_apply(p, f).inner(g)


def ambiguity_full_bruteforce(f: Sequence, g: Sequence, cap: int = DEFAULT_ORACLE_CAP) -> AmbiguityMatrix:
    """O(N^3) evaluation straight from the definition; test oracle only."""
    _check_pair(f, g)
    N = f.N
    if N > cap:
        raise OracleCapExceeded(f"brute-force oracle capped at N={cap}, got N={N}")
    out = np.empty((N, N), dtype=np.complex128)
    gc = np.conj(g.values)
    for tau in range(N):
        for omega in range(N):
            out[tau, omega] = np.sum(_heis(f.ctx, tau, omega, f.values) * gc)
    return AmbiguityMatrix(out)


def _gauss_sum(ctx: ModulusContext, A: int) -> complex:
    """``sum_n e(A n^2)`` for ``A != 0``: Legendre symbol times the quadratic Gauss sum."""
    N = ctx.N
    legendre = 1 if pow(A % N, (N - 1) // 2, N) == 1 else -1
    g1 = np.sqrt(N) if N % 4 == 1 else 1j * np.sqrt(N)
    return legendre * g1


def chirp_cross_ambiguity(ctx: ModulusContext, f_spec: ChirpSpec, g_spec: ChirpSpec,
                          tau, omega) -> np.ndarray:
    """Closed-form ``A(C_f, C_g)[tau, omega]`` for chirps on distinct lines.

    Two finite slopes give a quadratic Gauss sum, and a Doppler-line chirp
    (a delta) leaves a single term. ``tau`` and ``omega`` are integer arrays of
    equal shape; the cost is O(1) per point instead of O(N).
    """
    if f_spec.line == g_spec.line:
        raise ValueError("closed form needs chirps on distinct lines")
    N, h = ctx.N, ctx.half_inv
    t = np.asarray(tau, dtype=np.int64) % N
    w = np.asarray(omega, dtype=np.int64) % N
    heis = (-h * (t * w % N)) % N                        # e(-tau omega / 2)
    if g_spec.line.is_infinite:                          # <pi(v) C_f, delta_d> = (pi(v) C_f)[d]
        a, b, d = f_spec.line.slope, f_spec.b, g_spec.b
        m = (d - t) % N
        expo = heis + w * d + h * a * (m * m % N) - b * m
        return unit_root(ctx, expo % N) / np.sqrt(N)
    c, d = g_spec.line.slope, g_spec.b
    if f_spec.line.is_infinite:                          # pi(v) delta_b sits at n = b + tau
        n = (f_spec.b + t) % N
        expo = heis + w * n - h * c * (n * n % N) + d * n
        return unit_root(ctx, expo % N) / np.sqrt(N)
    a, b = f_spec.line.slope, f_spec.b
    A = h * (a - c) % N
    B = (w - a * t - b + d) % N
    const = (heis + h * a * (t * t % N) + b * t) % N
    inv4A = pow(4 * A, -1, N)
    expo = (const - (B * B % N) * inv4A) % N
    return unit_root(ctx, expo) * (_gauss_sum(ctx, A) / N)


def shear(ctx: ModulusContext, a: int, x: np.ndarray) -> np.ndarray:
    """Multiply by the quadratic phase ``e(a n^2 / 2)``."""
    n = np.arange(ctx.N, dtype=np.int64)
    return unit_root(ctx, (ctx.half_inv * a * ((n * n) % ctx.N)) % ctx.N) * x


def cyclic_xcorr(x: np.ndarray, y: np.ndarray, counter: OpCounter = NULL_COUNTER) -> np.ndarray:
    """``c[t] = sum_n x[n - t] conj(y[n])`` through three DFTs."""
    X = dft(x, counter=counter)
    Y = dft(y, counter=counter)
    counter.add(2 * x.shape[0], "correlate")
    return dft(X * np.conj(Y), counter=counter) / x.shape[0]


def _slice_through_origin(ctx: ModulusContext, f: np.ndarray, g: np.ndarray, L: Line,
                          counter: OpCounter) -> np.ndarray:
    N = ctx.N
    if L.slope is INFINITY:
        counter.add(2 * N, "correlate")
        # sum_n e(w n) f[n] conj(g[n]) = N * IDFT(f conj g)[w]
        return dft(f * np.conj(g), inverse=True, counter=counter) * N
    a = L.slope
    counter.add(4 * N, "correlate")
    return cyclic_xcorr(shear(ctx, -a, f), shear(ctx, -a, g), counter)


def ambiguity_on_line_fast(f: Sequence, g: Sequence, line: AffineLine,
                           counter: OpCounter | None = None) -> AmbiguitySlice:
    """A(f, g) restricted to an affine line, in O(N log N) operations."""
    _check_pair(f, g)
    counter = counter or NULL_COUNTER
    ctx = line.ctx
    if ctx != f.ctx:
        raise ValueError(f"line lives in N={ctx.N}, sequences have N={f.N}")
    N = ctx.N
    t0, w0 = line.anchor
    gv = g.values
    shifted = bool(t0 or w0)
    if shifted:
        gv = _heis(ctx, -t0 % N, -w0 % N, gv)
        counter.add(2 * N, "correlate")
    vals = _slice_through_origin(ctx, f.values, gv, line.base, counter)
    if shifted:
        k = np.arange(N, dtype=np.int64)
        if line.base.is_infinite:
            omega_form = t0 * k                   # Omega[u0, (0, k)]
        else:
            omega_form = (t0 * line.base.slope - w0) * k   # Omega[u0, (k, a k)]
        vals = vals * unit_root(ctx, (ctx.half_inv * omega_form) % N)
        counter.add(2 * N, "correlate")
    return AmbiguitySlice(line, vals)


def ambiguity_full_fast(f: Sequence, g: Sequence, counter: OpCounter | None = None) -> AmbiguityMatrix:
    """Entire ambiguity function as N vertical-line slices, O(N^2 log N)."""
    _check_pair(f, g)
    ctx = f.ctx
    doppler = Line(INFINITY)
    rows = [ambiguity_on_line_fast(f, g, AffineLine(ctx, doppler, PlanePoint(tau, 0)), counter).values
            for tau in range(ctx.N)]
    return AmbiguityMatrix(np.array(rows))


def line_values(mat: AmbiguityMatrix, ctx: ModulusContext, L: Line) -> np.ndarray:
    """Read the entries of a full matrix along a line through the origin."""
    return np.array([mat.values[p.tau, p.omega] for p in line_points(ctx, L)])


# -- export -----------------------------------------------------------------

def format_matrix_csv(values: np.ndarray) -> str:
    """Magnitudes as CSV, one delay per row."""
    mag = np.abs(values)
    return "".join(",".join(repr(float(v)) for v in row) + "\n" for row in mag)


def pgm_bytes(values: np.ndarray) -> bytes:
    """Binary P5 grayscale image of min-max scaled magnitudes."""
    mag = np.abs(np.asarray(values))
    lo, hi = float(mag.min()), float(mag.max())
    if hi > lo:
        img = np.round(255.0 * (mag - lo) / (hi - lo))
    else:
        img = np.zeros_like(mag)
    rows, cols = mag.shape
    header = f"P5\n{cols} {rows}\n255\n".encode("ascii")
    return header + img.astype(np.uint8).tobytes()


def write_matrix_csv(path, values: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write(format_matrix_csv(values))


def write_pgm(path, values: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(pgm_bytes(values))
