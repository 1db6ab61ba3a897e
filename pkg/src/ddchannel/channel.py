"""
Discrete sparse delay-Doppler channel with additive white Gaussian noise.

    H(S)[n] = sum_k alpha_k e(omega_k n) S[n - tau_k]
    R[n]    = H(S)[n] + W[n]

Delays wrap cyclically mod N. The SNR is ``<S, S> / E<W, W>``; noise is
circularly-symmetric complex Gaussian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .plane import ModulusContext, PlanePoint
from .sequences import Sequence, make_rng

POWER_SLACK = 1e-12


class ChannelError(ValueError):
    pass


class OffGridError(ChannelError):
    """Physical delay or Doppler does not fall on the sampling grid."""


@dataclass(frozen=True)
class PathParam:
    alpha: complex
    tau: int
    omega: int

    @property
    def point(self) -> PlanePoint:
        return PlanePoint(self.tau, self.omega)


@dataclass(frozen=True)
class ChannelSpec:
    ctx: ModulusContext
    paths: tuple[PathParam, ...]

    def __post_init__(self):
        N = self.ctx.N
        paths = tuple(PathParam(complex(p.alpha), int(p.tau) % N, int(p.omega) % N) for p in self.paths)
        if not paths:
            raise ChannelError("a channel needs at least one path")
        pts = [p.point for p in paths]
        if len(set(pts)) != len(pts):
            raise ChannelError("delay-Doppler pairs must be distinct")
        power = sum(abs(p.alpha) ** 2 for p in paths)
        if power > 1 + POWER_SLACK:
            raise ChannelError(f"sum |alpha|^2 = {power:.6g} exceeds 1")
        object.__setattr__(self, "paths", paths)

    @property
    def r(self) -> int:
        return len(self.paths)

    def points(self) -> list[PlanePoint]:
        return [p.point for p in self.paths]


@dataclass(frozen=True)
class NoiseModel:
    """Linear SNR (``math.inf`` means noiseless) and the noise seed."""

    snr: float
    seed: int = field(default=0)

    def __post_init__(self):
        if not self.snr > 0:
            raise ChannelError(f"snr must be positive, got {self.snr}")

    @property
    def noiseless(self) -> bool:
        return math.isinf(self.snr)


def apply_paths(paths, S: Sequence) -> np.ndarray:
    """``sum alpha_k e(omega_k n) S[n - tau_k]`` for any path list, unvalidated."""
    N = S.N
    n = np.arange(N, dtype=np.int64)
    out = np.zeros(N, dtype=np.complex128)
    for p in paths:
        out += p.alpha * np.exp(2j * np.pi * ((p.omega * n) % N) / N) * np.roll(S.values, p.tau)
    return out


def apply_channel(spec: ChannelSpec, S: Sequence) -> Sequence:
    if S.ctx != spec.ctx:
        raise ChannelError(f"length mismatch: channel N={spec.ctx.N}, sequence N={S.N}")
    return Sequence(spec.ctx, apply_paths(spec.paths, S))


def noise_sigma_sq(ctx: ModulusContext, probe_norm_sq: float, snr: float) -> float:
    """Per-coordinate noise variance E|W[n]|^2."""
    return probe_norm_sq / (ctx.N * snr)


def add_noise(R: Sequence, probe_norm_sq: float, model: NoiseModel) -> Sequence:
    if not probe_norm_sq > 0:
        raise ChannelError("probe_norm_sq must be positive")
    if model.noiseless:
        return R
    N = R.N
    sigma = math.sqrt(noise_sigma_sq(R.ctx, probe_norm_sq, model.snr) / 2)
    rng = make_rng(model.seed)
    w = rng.normal(0.0, sigma, size=(2, N))
    return Sequence(R.ctx, R.values + (w[0] + 1j * w[1]))


def random_channel(ctx: ModulusContext, r: int, seed: int, min_alpha: float | None = None) -> ChannelSpec:
    """r paths on distinct grid points, ``|alpha|`` uniform in ``[min_alpha, 1/sqrt(r)]``.

    ``min_alpha`` defaults to ``0.3/sqrt(r)``; passing ``1/sqrt(r)`` gives
    equal-magnitude paths with random phases.
    """
    N = ctx.N
    if not 1 <= r <= N * N:
        raise ChannelError(f"r must be in [1, N^2], got {r}")
    top = 1 / math.sqrt(r)
    if min_alpha is None:
        min_alpha = 0.3 * top
    if not 0 < min_alpha <= top * (1 + 1e-12):
        raise ChannelError(f"min_alpha must be in (0, 1/sqrt(r)], got {min_alpha}")
    rng = make_rng(seed)
    cells = rng.choice(N * N, size=r, replace=False)
    mags = rng.uniform(min(min_alpha, top), top, size=r)
    phases = rng.uniform(0.0, 2 * math.pi, size=r)
    alphas = mags * np.exp(1j * phases)
    power = float(np.sum(mags ** 2))
    if power > 1:
        alphas = alphas / math.sqrt(power)
    return ChannelSpec(ctx, tuple(PathParam(complex(a), int(c) // N, int(c) % N)
                                  for a, c in zip(alphas, cells)))


def physical_to_digital(t: float, f: float, W: float, ctx: ModulusContext, tol: float = 1e-9) -> PlanePoint:
    """Map delay ``t`` (s) and Doppler ``f`` (Hz) at bandwidth ``W`` (Hz) to Z_N x Z_N.

    Carrier effects are assumed already folded into ``f`` (baseband Doppler).
    """
    x = t * W
    y = ctx.N * f / W
    for name, val in (("delay t*W", x), ("Doppler N*f/W", y)):
        if abs(val - round(val)) > tol:
            raise OffGridError(f"{name} = {val!r} is not an integer")
    return ctx.point(round(x), round(y))


def noise_envelope(ctx: ModulusContext, snr: float) -> float:
    """``sqrt(2 ln ln N) / sqrt(N * snr)``, the iterated-log noise bound."""
    N = ctx.N
    if N < 16:
        raise ChannelError(f"noise envelope needs N >= 16, got {N}")
    if not snr > 0:
        raise ChannelError("snr must be positive")
    return math.sqrt(2 * math.log(math.log(N))) / math.sqrt(N * snr)


# -- scenario files ---------------------------------------------------------

def format_scenario(spec: ChannelSpec) -> str:
    lines = [f"N={spec.ctx.N} r={spec.r}"]
    for p in spec.paths:
        lines.append(f"{float(p.alpha.real)!r} {float(p.alpha.imag)!r} {p.tau} {p.omega}")
    return "\n".join(lines) + "\n"


def parse_scenario(text: str) -> ChannelSpec:
    rows = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not rows:
        raise ChannelError("empty scenario")
    head = dict(tok.split("=", 1) for tok in rows[0].split())
    try:
        N, r = int(head["N"]), int(head["r"])
    except (KeyError, ValueError):
        raise ChannelError("line 1: expected 'N=<int> r=<int>'") from None
    if len(rows) - 1 != r:
        raise ChannelError(f"header says r={r} but found {len(rows) - 1} path lines")
    ctx = ModulusContext(N)
    paths = []
    for i, row in enumerate(rows[1:], 2):
        parts = row.split()
        if len(parts) != 4:
            raise ChannelError(f"line {i}: expected '<alpha_re> <alpha_im> <tau> <omega>'")
        paths.append(PathParam(complex(float(parts[0]), float(parts[1])), int(parts[2]), int(parts[3])))
    return ChannelSpec(ctx, tuple(paths))


def write_scenario(path, spec: ChannelSpec) -> None:
    with open(path, "w") as fh:
        fh.write(format_scenario(spec))


def read_scenario(path) -> ChannelSpec:
    with open(path) as fh:
        return parse_scenario(fh.read())
