"""
Arithmetic on Z_N and geometry of the finite delay-Doppler plane Z_N x Z_N.

Points are ``(tau, omega)`` pairs reduced to ``[0, N)``. Lines through the
origin are indexed by their slope, which is either an element of Z_N or the
distinguished value :data:`INFINITY` (the Doppler axis ``{(0, w)}``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple, Union

import numpy as np


class PlaneError(ValueError):
    """Invalid modulus or geometric input."""


class _Infinity(enum.Enum):
    INFINITY = "inf"

    def __repr__(self) -> str:
        return "INFINITY"


INFINITY = _Infinity.INFINITY

Slope = Union[int, _Infinity]


class Incidence(enum.Enum):
    """Non-point outcomes of :func:`intersect`."""

    COINCIDENT = "coincident"
    PARALLEL = "parallel"


COINCIDENT = Incidence.COINCIDENT
PARALLEL = Incidence.PARALLEL


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


@dataclass(frozen=True)
class ModulusContext:
    """The modulus N (an odd prime) together with the inverse of 2 mod N."""

    N: int
    half_inv: int = field(init=False)

    def __post_init__(self):
        N = self.N
        if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
            raise PlaneError(f"N must be an integer, got {N!r}")
        if N < 3 or not is_prime(int(N)):
            raise PlaneError(f"N must be an odd prime, got {N}")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "half_inv", (int(N) + 1) // 2)

    def inv(self, x: int) -> int:
        x %= self.N
        if x == 0:
            raise ZeroDivisionError("0 has no inverse mod N")
        return pow(x, self.N - 2, self.N)

    def point(self, tau: int, omega: int) -> "PlanePoint":
        return PlanePoint(int(tau) % self.N, int(omega) % self.N)

    def add(self, p: "PlanePoint", q: "PlanePoint") -> "PlanePoint":
        return self.point(p.tau + q.tau, p.omega + q.omega)

    def sub(self, p: "PlanePoint", q: "PlanePoint") -> "PlanePoint":
        return self.point(p.tau - q.tau, p.omega - q.omega)

    def neg(self, p: "PlanePoint") -> "PlanePoint":
        return self.point(-p.tau, -p.omega)

    def line(self, slope) -> "Line":
        if slope is INFINITY:
            return Line(INFINITY)
        return Line(int(slope) % self.N)

    def all_lines(self) -> list["Line"]:
        return [Line(a) for a in range(self.N)] + [Line(INFINITY)]


class PlanePoint(NamedTuple):
    tau: int
    omega: int


@dataclass(frozen=True)
class Line:
    """A line through the origin; ``slope`` is in Z_N or :data:`INFINITY`."""

    slope: Slope

    def __repr__(self) -> str:
        return f"Line({self.slope!r})"

    @property
    def is_infinite(self) -> bool:
        return self.slope is INFINITY


def unit_root(ctx: ModulusContext, t):
    """Return ``e(t) = exp(2*pi*i*t/N)``; ``t`` may be an integer array.

    The argument is reduced mod N before exponentiating so large integers do
    not lose phase accuracy.
    """
    t = np.mod(t, ctx.N)
    out = np.exp(2j * np.pi * t / ctx.N)
    if np.ndim(out) == 0:
        return complex(out)
    return out


def line_point(ctx: ModulusContext, L: Line, k: int) -> PlanePoint:
    """k-th point of ``L`` in the canonical parameterization."""
    if L.slope is INFINITY:
        return ctx.point(0, k)
    return ctx.point(k, L.slope * k)


def line_points(ctx: ModulusContext, L: Line) -> list[PlanePoint]:
    """All N points of ``L``: ``(k, a*k)`` for slope a, ``(0, k)`` for INFINITY."""
    return [line_point(ctx, L, k) for k in range(ctx.N)]


def line_param(ctx: ModulusContext, L: Line, p: PlanePoint) -> int:
    """Inverse of :func:`line_point` for a point known to lie on ``L``."""
    return p.omega % ctx.N if L.slope is INFINITY else p.tau % ctx.N


def on_line(ctx: ModulusContext, L: Line, p: PlanePoint) -> bool:
    if L.slope is INFINITY:
        return p.tau % ctx.N == 0
    return (p.omega - L.slope * p.tau) % ctx.N == 0


def coset_key(ctx: ModulusContext, L: Line, p: PlanePoint) -> int:
    """Label of the coset ``p + L``; two points share a coset iff keys agree."""
    if L.slope is INFINITY:
        return p.tau % ctx.N
    return (p.omega - L.slope * p.tau) % ctx.N


@dataclass(frozen=True, eq=False)
class AffineLine:
    """The coset ``anchor + base``.

    Equality is by coset, not by anchor: two affine lines are equal when
    their bases agree and the anchor difference lies on the base.
    """

    ctx: ModulusContext
    base: Line
    anchor: PlanePoint = PlanePoint(0, 0)

    def __post_init__(self):
        object.__setattr__(self, "anchor", self.ctx.point(*self.anchor))

    @property
    def key(self) -> int:
        return coset_key(self.ctx, self.base, self.anchor)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AffineLine):
            return NotImplemented
        return (self.ctx == other.ctx and self.base == other.base
                and self.key == other.key)

    def __hash__(self) -> int:
        return hash((self.ctx.N, self.base, self.key))

    def point(self, k: int) -> PlanePoint:
        return self.ctx.add(self.anchor, line_point(self.ctx, self.base, k))

    def points(self) -> list[PlanePoint]:
        return [self.point(k) for k in range(self.ctx.N)]

    def index_of(self, p: PlanePoint) -> int:
        """Parameter k with ``self.point(k) == p``.

        Raises :class:`PlaneError` if ``p`` is not on this line.
        """
        d = self.ctx.sub(p, self.anchor)
        if not on_line(self.ctx, self.base, d):
            raise PlaneError(f"{tuple(p)} is not on {self!r}")
        return line_param(self.ctx, self.base, d)

    def __repr__(self) -> str:
        return f"AffineLine(N={self.ctx.N}, base={self.base!r}, anchor={tuple(self.anchor)})"


def contains(line: AffineLine, p: PlanePoint) -> bool:
    return on_line(line.ctx, line.base, line.ctx.sub(p, line.anchor))


def symplectic(ctx: ModulusContext, v: PlanePoint, w: PlanePoint) -> int:
    """``tau*omega' - omega*tau'`` mod N."""
    return (v.tau * w.omega - v.omega * w.tau) % ctx.N


def intersect(a: AffineLine, b: AffineLine) -> PlanePoint | Incidence:
    """Intersection of two affine lines.

    Returns the common point when the base slopes differ, otherwise
    :data:`COINCIDENT` or :data:`PARALLEL`.
    """
    ctx = a.ctx
    if a.base == b.base:
        return COINCIDENT if a == b else PARALLEL
    if a.base.is_infinite:
        a, b = b, a
    s1, k1 = a.base.slope, a.key
    if b.base.is_infinite:
        tau = b.key
    else:
        # w - s1*t = k1 and w - s2*t = k2
        tau = (k1 - b.key) * ctx.inv(b.base.slope - s1)
    return ctx.point(tau, k1 + s1 * tau)


def decompose(ctx: ModulusContext, v: PlanePoint, L: Line, M: Line) -> tuple[PlanePoint, PlanePoint]:
    """Split ``v = l + m`` with ``l`` on ``L`` and ``m`` on ``M`` (L != M)."""
    if L == M:
        raise PlaneError("decomposition needs two distinct lines")
    l = intersect(AffineLine(ctx, L), AffineLine(ctx, M, v))
    return l, ctx.sub(v, l)
