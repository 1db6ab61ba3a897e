"""
Scoring against ground truth, Monte Carlo sweeps, complexity fits and
figure-data export.

Every trial is driven by one integer seed (``base_seed + trial index``) from
which independent sub-seeds for the probe lines, the channel, the noise and
the pseudo-random probe are derived with :class:`numpy.random.SeedSequence`.
The same seed therefore yields the same scenario in every cell and in every
run, and adding trials never changes earlier ones.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from .ambiguity import ambiguity_full_fast, ambiguity_on_line_fast, format_matrix_csv, pgm_bytes
from .channel import ChannelSpec, NoiseModel, add_noise, apply_channel, random_channel
from .estimators import (EstimateReport, Method, Thresholds, cross_method, incidence_method,
                         pr_method)
from .plane import AffineLine, ModulusContext, coset_key, is_prime, on_line
from .sequences import ChirpSpec, Sequence, multi_chirp, pseudo_random, random_line_set


class ConfigError(ValueError):
    pass


class ExportError(OSError):
    pass


# -- scoring ------------------------------------------------------------------

@dataclass(frozen=True)
class ScoreCard:
    true_positive: int
    false_positive: int
    false_negative: int
    max_alpha_error: float
    mean_alpha_error: float
    alpha_outliers: int = 0     # matched paths whose attenuation error exceeds alpha_tol

    @property
    def exact(self) -> bool:
        return self.false_positive == 0 and self.false_negative == 0


def score(report: EstimateReport | list, truth: ChannelSpec, alpha_tol: float = math.inf) -> ScoreCard:
    """Exact (tau, omega) set comparison; attenuation errors over matches only."""
    paths = report.paths if isinstance(report, EstimateReport) else report
    got = {p.point: p.alpha for p in paths}
    want = {p.point: p.alpha for p in truth.paths}
    hits = sorted(set(got) & set(want))
    errs = [abs(got[k] - want[k]) for k in hits]
    return ScoreCard(
        true_positive=len(hits),
        false_positive=len(got) - len(hits),
        false_negative=len(want) - len(hits),
        max_alpha_error=max(errs, default=0.0),
        mean_alpha_error=float(np.mean(errs)) if errs else 0.0,
        alpha_outliers=sum(e > alpha_tol for e in errs),
    )


# -- degeneracy ---------------------------------------------------------------

ON_PROBE_LINE = "on_probe_line"
PROJECTION_COLLISION = "projection_collision"


def classify_degeneracy(ctx: ModulusContext, channel: ChannelSpec, specs: list[ChirpSpec]) -> str | None:
    """Why a scenario violates genericity for the given probe lines, or None.

    A path on one of the probe lines has no well-defined pair of peaks; two
    paths on the same coset of a probe line project to the same peak of the
    slice read along the other line.
    """
    if not specs:
        return None
    pts = channel.points()
    lines = [s.line for s in specs]
    if any(on_line(ctx, L, v) for v in pts for L in lines):
        return ON_PROBE_LINE
    for L in lines:
        keys = [coset_key(ctx, L, v) for v in pts]
        if len(set(keys)) < len(keys):
            return PROJECTION_COLLISION
    return None


# -- trials -------------------------------------------------------------------

METHODS = {"pr": Method.PR, "cross": Method.CROSS, "incidence": Method.INCIDENCE}
PROBE_LINES = {Method.CROSS: 2, Method.INCIDENCE: 3}


def trial_seeds(seed: int) -> dict[str, int]:
    """Independent sub-seeds for one trial."""
    state = np.random.SeedSequence(int(seed)).generate_state(4, dtype=np.uint32)
    return dict(zip(("lines", "channel", "noise", "probe"), (int(s) for s in state)))


@dataclass(frozen=True)
class Trial:
    """One simulated scenario and its estimate."""

    seed: int
    probe: Sequence
    specs: tuple[ChirpSpec, ...]
    channel: ChannelSpec
    echo: Sequence
    degeneracy: str | None
    report: EstimateReport | None
    card: ScoreCard | None


def run_trial(method: Method, N: int, r: int, snr: float, seed: int,
              thresholds: Thresholds | None = None, min_alpha_ratio: float = 1.0,
              estimate_degenerate: bool = False) -> Trial:
    """Draw a scenario from ``seed``, simulate the echo and estimate.

    ``|alpha|`` is uniform in ``[min_alpha_ratio, 1] / sqrt(r)`` with uniform
    phases; the default ratio 1 gives equal-magnitude paths. Degenerate
    scenarios are not estimated unless ``estimate_degenerate`` is set.
    """
    ctx = ModulusContext(N)
    sub = trial_seeds(seed)
    if thresholds is None:
        thresholds = Thresholds(snr_hint=snr)
    channel = random_channel(ctx, r, sub["channel"], min_alpha=min_alpha_ratio / math.sqrt(r))
    if method is Method.PR:
        specs = ()
        probe = pseudo_random(ctx, sub["probe"])
    else:
        specs = tuple(random_line_set(ctx, PROBE_LINES[method], sub["lines"]))
        probe = multi_chirp(ctx, list(specs))
    echo = add_noise(apply_channel(channel, probe), probe.norm_sq(), NoiseModel(snr, sub["noise"]))
    degeneracy = classify_degeneracy(ctx, channel, list(specs))
    report = card = None
    if degeneracy is None or estimate_degenerate:
        report = estimate(method, probe, specs, echo, thresholds)
        card = score(report, channel)
    return Trial(seed, probe, specs, channel, echo, degeneracy, report, card)


def estimate(method: Method, probe: Sequence, specs, echo: Sequence,
             thresholds: Thresholds) -> EstimateReport:
    if method is Method.PR:
        return pr_method(probe, echo, thresholds)
    if method is Method.CROSS:
        return cross_method(*specs, echo, thresholds)
    return incidence_method(*specs, echo, thresholds)


# -- sweeps -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepConfig:
    N_list: tuple[int, ...]
    r_list: tuple[int, ...]
    snr_list: tuple[float, ...]
    method_list: tuple[Method, ...]
    trials_per_cell: int
    base_seed: int = 0
    thresholds: Thresholds = field(default_factory=Thresholds)
    min_alpha_ratio: float = 1.0

    def __post_init__(self):
        for name in ("N_list", "r_list", "snr_list", "method_list"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be nonempty")
            object.__setattr__(self, name, tuple(getattr(self, name)))
        bad = [N for N in self.N_list if N < 3 or not is_prime(N)]
        if bad:
            raise ConfigError(f"N must be an odd prime, got {bad[0]}")
        if any(r < 1 for r in self.r_list):
            raise ConfigError("every r must be >= 1")
        if any(not s > 0 for s in self.snr_list):
            raise ConfigError("every snr must be positive (inf for noiseless)")
        if self.trials_per_cell < 1:
            raise ConfigError("trials_per_cell must be >= 1")
        if not 0 < self.min_alpha_ratio <= 1:
            raise ConfigError("min_alpha_ratio must be in (0, 1]")

    def cells(self):
        for N in self.N_list:
            for r in self.r_list:
                for snr in self.snr_list:
                    for method in self.method_list:
                        yield N, r, snr, method


TRIAL_COLUMNS = ("N", "r", "snr", "method", "trial", "seed", "degenerate",
                 "true_positive", "false_positive", "false_negative",
                 "max_alpha_error", "op_count")
CELL_COLUMNS = ("N", "r", "snr", "method", "trials", "degenerate", "detection_rate",
                "false_alarm_rate", "mean_alpha_error", "mean_op_count", "wall_time")


@dataclass
class SweepResult:
    trials: list[dict]
    cells: list[dict]


def _cell_thresholds(base: Thresholds, snr: float) -> Thresholds:
    return Thresholds(base.T, base.T1, base.T2, snr, base.leak)


def run_sweep(config: SweepConfig) -> SweepResult:
    """Every (N, r, snr, method) cell, ``trials_per_cell`` seeded trials each.

    Rates pool the non-degenerate trials of a cell: detection rate is
    ``tp / (tp + fn)`` and false-alarm rate ``fp / (tp + fp)`` (0 when
    nothing was reported). Degenerate trials are counted, not estimated.
    """
    trial_rows, cell_rows = [], []
    for N, r, snr, method in config.cells():
        th = _cell_thresholds(config.thresholds, snr)
        tp = fp = fn = degenerate = 0
        alpha_errs, ops = [], []
        start = time.perf_counter()
        for t in range(config.trials_per_cell):
            seed = config.base_seed + t
            tr = run_trial(method, N, r, snr, seed, th, config.min_alpha_ratio)
            row = {"N": N, "r": r, "snr": snr, "method": method.value, "trial": t, "seed": seed,
                   "degenerate": tr.degeneracy or ""}
            if tr.card is None:
                degenerate += 1
                row.update(true_positive="", false_positive="", false_negative="",
                           max_alpha_error="", op_count="")
            else:
                c = tr.card
                tp, fp, fn = tp + c.true_positive, fp + c.false_positive, fn + c.false_negative
                if c.true_positive:
                    alpha_errs.append(c.mean_alpha_error)
                ops.append(tr.report.op_count)
                row.update(true_positive=c.true_positive, false_positive=c.false_positive,
                           false_negative=c.false_negative, max_alpha_error=c.max_alpha_error,
                           op_count=tr.report.op_count)
            trial_rows.append(row)
        cell_rows.append({
            "N": N, "r": r, "snr": snr, "method": method.value,
            "trials": config.trials_per_cell, "degenerate": degenerate,
            "detection_rate": tp / (tp + fn) if tp + fn else math.nan,
            "false_alarm_rate": fp / (tp + fp) if tp + fp else 0.0,
            "mean_alpha_error": float(np.mean(alpha_errs)) if alpha_errs else math.nan,
            "mean_op_count": float(np.mean(ops)) if ops else math.nan,
            "wall_time": time.perf_counter() - start,
        })
    return SweepResult(trial_rows, cell_rows)


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def table_csv(rows: list[dict], columns, skip=()) -> str:
    cols = [c for c in columns if c not in skip]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in cols])
    return buf.getvalue()


def sweep_csv(result: SweepResult, timing: bool = False) -> tuple[str, str]:
    """Trial table and summary table as CSV text.

    Wall time is left out unless ``timing`` is set, so that the default
    output is byte-identical across runs.
    """
    skip = () if timing else ("wall_time",)
    return table_csv(result.trials, TRIAL_COLUMNS), table_csv(result.cells, CELL_COLUMNS, skip)


# -- complexity ---------------------------------------------------------------

def fit_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)[0])


@dataclass
class BenchResult:
    method: Method
    variable: str              # "N" or "r"
    rows: list[tuple[int, float]]
    slope: float
    stage: str | None = None

    def csv(self) -> str:
        header = f"{self.variable},mean_op_count\n"
        body = "".join(f"{x},{float(y)!r}\n" for x, y in self.rows)
        return header + body + f"# slope={self.slope!r} stage={self.stage or 'total'}\n"


def _mean_ops(method: Method, N: int, r: int, trials: int, base_seed: int, stage: str | None) -> float:
    counts = []
    for t in range(trials):
        tr = run_trial(method, N, r, math.inf, base_seed + t, estimate_degenerate=True)
        stages = tr.report.diagnostics["op_stages"]
        counts.append(stages.get(stage, 0) if stage else tr.report.op_count)
    return float(np.mean(counts))


def bench_complexity(method: Method, N_list, r: int, trials: int = 3, base_seed: int = 0,
                     stage: str | None = None) -> BenchResult:
    """Mean op count over noiseless trials for each N, and its log-log slope."""
    N_list = list(N_list)
    if len(N_list) < 3 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ConfigError("N_list must be strictly increasing with at least 3 entries")
    if any(not is_prime(N) or N < 3 for N in N_list):
        raise ConfigError("every N must be an odd prime")
    rows = [(N, _mean_ops(method, N, r, trials, base_seed, stage)) for N in N_list]
    return BenchResult(method, "N", rows, fit_slope(*zip(*rows)), stage)


def bench_sparsity(method: Method, N: int, r_list, trials: int = 3, base_seed: int = 0,
                   stage: str | None = "matching") -> BenchResult:
    """Mean op count of one stage against the number of paths, and its slope."""
    r_list = list(r_list)
    if len(r_list) < 2:
        raise ConfigError("r_list needs at least 2 entries")
    rows = [(r, _mean_ops(method, N, r, trials, base_seed, stage)) for r in r_list]
    return BenchResult(method, "r", rows, fit_slope(*zip(*rows)), stage)


# -- figure data --------------------------------------------------------------

class FigureKind(enum.Enum):
    AMBIGUITY_HEATMAP = "heatmap"
    SLICE_PROFILE = "slice"
    SWEEP_TABLE = "sweep"


def _write(path: str, data) -> None:
    mode = "wb" if isinstance(data, bytes) else "w"
    try:
        with open(path, mode) as fh:
            fh.write(data)
    except OSError as exc:
        raise ExportError(f"cannot write {path}: {exc.strerror or exc}") from exc


def slice_csv(f: Sequence, g: Sequence, line: AffineLine) -> str:
    sl = ambiguity_on_line_fast(f, g, line)
    out = ["k,tau,omega,re,im,abs"]
    for k, (p, z) in enumerate(zip(line.points(), sl.values)):
        out.append(f"{k},{p.tau},{p.omega},{float(z.real)!r},{float(z.imag)!r},{float(abs(z))!r}")
    return "\n".join(out) + "\n"


def export_figure_data(kind: FigureKind, inputs, out_dir: str, stem: str = "figure") -> list[str]:
    """Write the data behind one figure; returns the files written.

    ``inputs`` is ``(f, g)`` for a heatmap of ``|A(f, g)|``, ``(f, g, line)``
    for a slice profile, and a :class:`SweepResult` for a sweep table.
    Matrix kinds produce a CSV and a binary PGM, the others CSV only.
    """
    written = []
    base = os.path.join(out_dir, stem)
    if kind is FigureKind.AMBIGUITY_HEATMAP:
        f, g = inputs
        mat = ambiguity_full_fast(f, g).values
        _write(base + ".csv", format_matrix_csv(mat))
        _write(base + ".pgm", pgm_bytes(mat))
        written += [base + ".csv", base + ".pgm"]
    elif kind is FigureKind.SLICE_PROFILE:
        f, g, line = inputs
        _write(base + ".csv", slice_csv(f, g, line))
        written.append(base + ".csv")
    elif kind is FigureKind.SWEEP_TABLE:
        trials, cells = sweep_csv(inputs)
        _write(base + "_trials.csv", trials)
        _write(base + ".csv", cells)
        written += [base + "_trials.csv", base + ".csv"]
    else:
        raise ValueError(f"unknown figure kind {kind!r}")
    return written
