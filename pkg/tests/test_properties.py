"""Property-based checks of the algebraic invariants."""

import math

import numpy as np
from hypothesis import given, settings, strategies as st

from ddchannel.ambiguity import (ambiguity_full_fast, ambiguity_on_line_fast, ambiguity_point,
                                 chirp_cross_ambiguity, heisenberg_apply)
from ddchannel.channel import ChannelSpec, PathParam, apply_channel, format_scenario, parse_scenario
from ddchannel.dft import dft, naive_dft
from ddchannel.estimators import AmbiguitySlice, detect_peaks
from ddchannel.evalharness import score
from ddchannel.plane import (COINCIDENT, INFINITY, PARALLEL, AffineLine, Line, ModulusContext, PlanePoint, contains,
                             decompose, intersect, line_points, on_line, symplectic, unit_root)
from ddchannel.sequences import (ChirpSpec, Sequence, chirp, chirp_character, format_sequence,
                                 parse_sequence)

PRIMES = [3, 5, 7, 11, 13, 31]


@st.composite
def contexts(draw, primes=PRIMES):
    return ModulusContext(draw(st.sampled_from(primes)))


@st.composite
def ctx_and_line(draw, primes=PRIMES):
    ctx = draw(contexts(primes))
    slope = draw(st.integers(0, ctx.N))
    return ctx, Line(INFINITY) if slope == ctx.N else Line(slope)


def points(ctx):
    return st.builds(PlanePoint, st.integers(0, ctx.N - 1), st.integers(0, ctx.N - 1))


def vectors(N):
    parts = st.floats(-1, 1, allow_nan=False, allow_infinity=False)
    return st.lists(st.tuples(parts, parts), min_size=N, max_size=N).map(
        lambda xs: np.array([complex(a, b) for a, b in xs]))


@given(st.data())
def test_unit_root_character(data):
    ctx = data.draw(contexts())
    s, t = data.draw(st.integers(-10 ** 9, 10 ** 9)), data.draw(st.integers(-10 ** 9, 10 ** 9))
    assert abs(unit_root(ctx, s + t) - unit_root(ctx, s) * unit_root(ctx, t)) < 1e-12


@given(st.data())
def test_symplectic_antisymmetric_and_bilinear(data):
    ctx = data.draw(contexts())
    u, v, w = (data.draw(points(ctx)) for _ in range(3))
    assert symplectic(ctx, u, v) == (-symplectic(ctx, v, u)) % ctx.N
    assert symplectic(ctx, ctx.add(u, v), w) == (symplectic(ctx, u, w) + symplectic(ctx, v, w)) % ctx.N


@given(st.data())
def test_symplectic_vanishes_exactly_on_common_lines(data):
    ctx = data.draw(contexts([5, 7, 11]))
    v, w = data.draw(points(ctx)), data.draw(points(ctx))
    shared = any(on_line(ctx, L, v) and on_line(ctx, L, w) for L in ctx.all_lines())
    assert (symplectic(ctx, v, w) == 0) == shared


@given(st.data())
def test_intersection_lies_on_both_lines(data):
    ctx, L = data.draw(ctx_and_line())
    _, M = data.draw(ctx_and_line([ctx.N]))
    a = AffineLine(ctx, L, data.draw(points(ctx)))
    b = AffineLine(ctx, M, data.draw(points(ctx)))
    p = intersect(a, b)
    common = set(a.points()) & set(b.points())
    if L != M:
        assert common == {p}
    elif a == b:
        assert p is COINCIDENT
    else:
        assert p is PARALLEL and not common


@given(st.data())
def test_decompose_splits_points(data):
    ctx, L = data.draw(ctx_and_line())
    _, M = data.draw(ctx_and_line([ctx.N]))
    if L == M:
        return
    v = data.draw(points(ctx))
    l, m = decompose(ctx, v, L, M)
    assert on_line(ctx, L, l) and on_line(ctx, M, m) and ctx.add(l, m) == v


@given(st.data())
def test_chirp_eigenfunction(data):
    ctx, L = data.draw(ctx_and_line())
    spec = ChirpSpec(L, data.draw(st.integers(0, ctx.N - 1)))
    c = chirp(ctx, spec)
    l = line_points(ctx, L)[data.draw(st.integers(0, ctx.N - 1))]
    assert np.allclose(heisenberg_apply(l, c).values, chirp_character(ctx, spec)(l) * c.values, atol=1e-10)


@given(st.data())
def test_character_multiplicative(data):
    ctx, L = data.draw(ctx_and_line())
    psi = chirp_character(ctx, ChirpSpec(L, data.draw(st.integers(0, ctx.N - 1))))
    pts = line_points(ctx, L)
    p, q = pts[data.draw(st.integers(0, ctx.N - 1))], pts[data.draw(st.integers(0, ctx.N - 1))]
    assert abs(psi(ctx.add(p, q)) - psi(p) * psi(q)) < 1e-12


@settings(max_examples=50)
@given(st.data())
def test_chirp_pair_closed_form(data):
    ctx, L = data.draw(ctx_and_line())
    _, M = data.draw(ctx_and_line([ctx.N]))
    if L == M:
        return
    f = ChirpSpec(L, data.draw(st.integers(0, ctx.N - 1)))
    g = ChirpSpec(M, data.draw(st.integers(0, ctx.N - 1)))
    v = data.draw(points(ctx))
    closed = chirp_cross_ambiguity(ctx, f, g, [v.tau], [v.omega])[0]
    assert abs(closed - ambiguity_point(chirp(ctx, f), chirp(ctx, g), v)) < 1e-12


@given(st.data())
def test_dft_matches_naive_and_inverts(data):
    N = data.draw(st.sampled_from(PRIMES))
    x = data.draw(vectors(N))
    assert np.allclose(dft(x), naive_dft(x), atol=1e-9)
    assert np.allclose(dft(dft(x), inverse=True), x, atol=1e-10)


@settings(max_examples=50)
@given(st.data())
def test_fast_slice_matches_pointwise(data):
    ctx, L = data.draw(ctx_and_line())
    f, g = Sequence(ctx, data.draw(vectors(ctx.N))), Sequence(ctx, data.draw(vectors(ctx.N)))
    line = AffineLine(ctx, L, data.draw(points(ctx)))
    fast = ambiguity_on_line_fast(f, g, line).values
    assert np.allclose(fast, [ambiguity_point(f, g, p) for p in line.points()], atol=1e-9)


@settings(max_examples=30)
@given(st.data())
def test_cauchy_schwarz(data):
    ctx = data.draw(contexts())
    f, g = Sequence(ctx, data.draw(vectors(ctx.N))), Sequence(ctx, data.draw(vectors(ctx.N)))
    assert np.abs(ambiguity_full_fast(f, g).values).max() <= f.norm() * g.norm() + 1e-9


@given(st.data())
def test_commutation_relation(data):
    ctx = ModulusContext(7)
    f = Sequence(ctx, data.draw(vectors(7)))
    x, y = data.draw(points(ctx)), data.draw(points(ctx))
    xy = heisenberg_apply(x, heisenberg_apply(y, f)).values
    yx = heisenberg_apply(y, heisenberg_apply(x, f)).values
    phase = unit_root(ctx, (x.omega * y.tau - x.tau * y.omega) % 7)
    assert np.allclose(xy, phase * yx, atol=1e-10)


@st.composite
def channels(draw, ctx, max_r=4):
    cells = draw(st.lists(st.integers(0, ctx.N ** 2 - 1), min_size=1, max_size=max_r, unique=True))
    top = 1 / math.sqrt(len(cells))
    mags = draw(st.lists(st.floats(0, top), min_size=len(cells), max_size=len(cells)))
    phases = draw(st.lists(st.floats(0, 2 * math.pi), min_size=len(cells), max_size=len(cells)))
    return ChannelSpec(ctx, tuple(PathParam(m * complex(math.cos(p), math.sin(p)), c // ctx.N, c % ctx.N)
                                  for m, p, c in zip(mags, phases, cells)))


@given(st.data())
def test_channel_linearity_and_energy(data):
    ctx = data.draw(contexts())
    spec = data.draw(channels(ctx))
    S1, S2 = Sequence(ctx, data.draw(vectors(ctx.N))), Sequence(ctx, data.draw(vectors(ctx.N)))
    a = complex(data.draw(st.floats(-2, 2)), data.draw(st.floats(-2, 2)))
    lhs = apply_channel(spec, S1 * a + S2).values
    assert np.allclose(lhs, a * apply_channel(spec, S1).values + apply_channel(spec, S2).values, atol=1e-10)
    assert apply_channel(spec, S1).norm() <= sum(abs(p.alpha) for p in spec.paths) * S1.norm() + 1e-12


@given(st.data())
def test_channel_is_heisenberg_sum(data):
    ctx = ModulusContext(7)
    spec = data.draw(channels(ctx))
    S = Sequence(ctx, data.draw(vectors(7)))
    composed = sum(p.alpha * unit_root(ctx, (ctx.half_inv * p.tau * p.omega) % 7)
                   * heisenberg_apply(p.point, S).values for p in spec.paths)
    assert np.allclose(apply_channel(spec, S).values, composed, atol=1e-10)


@given(st.data())
def test_file_formats_round_trip(data):
    ctx = data.draw(contexts())
    spec = data.draw(channels(ctx))
    assert parse_scenario(format_scenario(spec)) == spec
    seq = Sequence(ctx, data.draw(vectors(ctx.N)))
    assert np.array_equal(parse_sequence(format_sequence(seq))[0].values, seq.values)


@given(st.data())
def test_peaks_shrink_as_bar_rises(data):
    ctx, L = data.draw(ctx_and_line())
    sl = AmbiguitySlice(AffineLine(ctx, L), data.draw(vectors(ctx.N)))
    lo, hi = sorted(data.draw(st.floats(0, 1.5)) for _ in range(2))
    high, low = detect_peaks(sl, hi), detect_peaks(sl, lo)
    assert set(high.points) <= set(low.points)
    mags = [abs(z) for _, z in low.entries]
    assert mags == sorted(mags, reverse=True) and all(m >= lo for m in mags)


@given(st.data())
def test_score_conservation(data):
    ctx = data.draw(contexts())
    truth = data.draw(channels(ctx, 6))
    guess = data.draw(channels(ctx, 6))
    card = score(list(guess.paths), truth)
    assert card.true_positive + card.false_negative == truth.r
    assert card.true_positive + card.false_positive == guess.r
