"""
Probe sequences on Z_N: chirps, double and triple chirps, random phases.

A chirp with finite slope ``a`` and parameter ``b`` is

    C[n] = e(a*n^2/2 - b*n) / sqrt(N)

and the chirp of the Doppler line (slope INFINITY) is the delta at ``b``.
Each chirp is a joint eigenvector of the Heisenberg operators along its line;
the eigenvalues form the character returned by :func:`chirp_character`.

Random draws use numpy's PCG64 bit generator seeded with the given integer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .plane import INFINITY, Line, ModulusContext, PlanePoint, PlaneError, on_line, unit_root


class SameLineError(ValueError):
    """Two components of a multi-chirp share a line."""


class TooManyLinesError(ValueError):
    """More distinct lines requested than the N + 1 that exist."""


def make_rng(seed: int) -> np.random.Generator:
    if seed is None:
        raise ValueError("an explicit integer seed is required")
    return np.random.Generator(np.random.PCG64(int(seed)))


@dataclass(frozen=True, eq=False)
class Sequence:
    """A length-N complex vector tied to its modulus."""

    ctx: ModulusContext
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != (self.ctx.N,):
            raise ValueError(f"sequence must have shape ({self.ctx.N},), got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def N(self) -> int:
        return self.ctx.N

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def norm_sq(self) -> float:
        return float(np.vdot(self.values, self.values).real)

    def inner(self, other: "Sequence") -> complex:
        """``sum x[n] * conj(y[n])`` (conjugate-linear in ``other``)."""
        return complex(np.sum(self.values * np.conj(other.values)))

    def __add__(self, other: "Sequence") -> "Sequence":
        return Sequence(self.ctx, self.values + other.values)

    def __sub__(self, other: "Sequence") -> "Sequence":
        return Sequence(self.ctx, self.values - other.values)

    def __mul__(self, c) -> "Sequence":
        return Sequence(self.ctx, self.values * c)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sequence):
            return NotImplemented
        return self.ctx == other.ctx and np.array_equal(self.values, other.values)

    __hash__ = None

    @classmethod
    def zeros(cls, ctx: ModulusContext) -> "Sequence":
        return cls(ctx, np.zeros(ctx.N, dtype=np.complex128))


@dataclass(frozen=True)
class ChirpSpec:
    line: Line
    b: int

    def __post_init__(self):
        if not isinstance(self.line, Line):
            raise TypeError("ChirpSpec.line must be a Line")
        if self.b < 0:
            raise ValueError("b must be reduced to [0, N)")


@dataclass(frozen=True)
class Character:
    """Multiplicative phase on a line attached to a chirp.

    ``psi(tau, a*tau) = e(b*tau)`` on a finite-slope line and
    ``psi(0, w) = e(b*w)`` on the Doppler line.
    """

    ctx: ModulusContext
    line: Line
    b: int

    def exponent(self, p: PlanePoint) -> int:
        if not on_line(self.ctx, self.line, p):
            raise PlaneError(f"{tuple(p)} is not on {self.line!r}")
        t = p.omega if self.line.is_infinite else p.tau
        return (self.b * t) % self.ctx.N

    def __call__(self, p: PlanePoint) -> complex:
        return unit_root(self.ctx, self.exponent(p))


def _check_spec(ctx: ModulusContext, spec: ChirpSpec) -> None:
    if spec.b >= ctx.N:
        raise ValueError(f"b={spec.b} not reduced mod N={ctx.N}")
    if not spec.line.is_infinite and not 0 <= spec.line.slope < ctx.N:
        raise ValueError(f"slope {spec.line.slope} not reduced mod N={ctx.N}")


def chirp(ctx: ModulusContext, spec: ChirpSpec) -> Sequence:
    _check_spec(ctx, spec)
    N = ctx.N
    if spec.line.is_infinite:
        v = np.zeros(N, dtype=np.complex128)
        v[spec.b] = 1.0
        return Sequence(ctx, v)
    n = np.arange(N, dtype=np.int64)
    a = spec.line.slope
    expo = (ctx.half_inv * a * (n * n % N) - spec.b * n) % N
    return Sequence(ctx, unit_root(ctx, expo) / np.sqrt(N))


def chirp_character(ctx: ModulusContext, spec: ChirpSpec) -> Character:
    _check_spec(ctx, spec)
    return Character(ctx, spec.line, spec.b)


def _check_distinct(specs: Iterable[ChirpSpec]) -> None:
    seen = set()
    for s in specs:
        if s.line in seen:
            raise SameLineError(f"two chirps share {s.line!r}")
        seen.add(s.line)


def multi_chirp(ctx: ModulusContext, specs: list[ChirpSpec]) -> Sequence:
    """Normalized sum ``(C_1 + ... + C_K) / sqrt(K)`` over distinct lines."""
    _check_distinct(specs)
    total = sum(chirp(ctx, s).values for s in specs)
    return Sequence(ctx, total / np.sqrt(len(specs)))


def double_chirp(ctx: ModulusContext, L: ChirpSpec, M: ChirpSpec) -> Sequence:
    return multi_chirp(ctx, [L, M])


def triple_chirp(ctx: ModulusContext, L: ChirpSpec, M: ChirpSpec, Mo: ChirpSpec) -> Sequence:
    return multi_chirp(ctx, [L, M, Mo])


def pseudo_random(ctx: ModulusContext, seed: int) -> Sequence:
    """Unit-norm sequence of i.i.d. uniform phases, deterministic per seed."""
    u = make_rng(seed).random(ctx.N)
    return Sequence(ctx, np.exp(2j * np.pi * u) / np.sqrt(ctx.N))


def random_line_set(ctx: ModulusContext, count: int, seed: int) -> list[ChirpSpec]:
    """``count`` chirp specs on pairwise-distinct random lines."""
    if count > ctx.N + 1:
        raise TooManyLinesError(f"only {ctx.N + 1} lines exist for N={ctx.N}, asked for {count}")
    if count < 0:
        raise ValueError("count must be nonnegative")
    rng = make_rng(seed)
    slopes = rng.choice(ctx.N + 1, size=count, replace=False)
    bs = rng.integers(0, ctx.N, size=count)
    return [ChirpSpec(ctx.line(INFINITY if s == ctx.N else int(s)), int(b))
            for s, b in zip(slopes, bs)]


# -- text format ------------------------------------------------------------

def format_sequence(seq: Sequence, header: dict[str, str] | None = None) -> str:
    """Serialize as ``N=<int>``, optional ``# key=value`` lines, then samples."""
    lines = [f"N={seq.N}"]
    for k, v in (header or {}).items():
        lines.append(f"# {k}={v}")
    for z in seq.values:
        lines.append(f"{float(z.real)!r} {float(z.imag)!r}")
    return "\n".join(lines) + "\n"


def parse_sequence(text: str) -> tuple[Sequence, dict[str, str]]:
    header: dict[str, str] = {}
    N = None
    samples = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                k, v = body.split("=", 1)
                header[k.strip()] = v.strip()
            continue
        if N is None:
            if not line.startswith("N="):
                raise ValueError(f"line {lineno}: expected 'N=<int>' header")
            N = int(line[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected '<re> <im>'")
        samples.append(complex(float(parts[0]), float(parts[1])))
    if N is None:
        raise ValueError("missing 'N=<int>' header")
    if len(samples) != N:
        raise ValueError(f"header says N={N} but found {len(samples)} samples")
    return Sequence(ModulusContext(N), np.array(samples)), header


def write_sequence(path, seq: Sequence, header: dict[str, str] | None = None) -> None:
    with open(path, "w") as fh:
        fh.write(format_sequence(seq, header))


def read_sequence(path) -> tuple[Sequence, dict[str, str]]:
    with open(path) as fh:
        return parse_sequence(fh.read())


def format_spec(spec: ChirpSpec) -> str:
    slope = "inf" if spec.line.is_infinite else str(spec.line.slope)
    return f"{slope},{spec.b}"


def parse_spec(ctx: ModulusContext, text: str) -> ChirpSpec:
    slope, b = (t.strip() for t in text.split(","))
    line = ctx.line(INFINITY if slope.lower() in ("inf", "infinity") else int(slope))
    return ChirpSpec(line, int(b) % ctx.N)
