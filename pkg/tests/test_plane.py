import itertools
import math

import numpy as np
import pytest

from ddchannel.plane import (COINCIDENT, INFINITY, PARALLEL, AffineLine, Line, ModulusContext,
                             PlaneError, PlanePoint, contains, decompose, intersect, is_prime,
                             line_points, on_line, symplectic, unit_root)


@pytest.mark.parametrize("N", [4, 9, 15, 2, 1, 0, -7])
def test_rejects_non_odd_prime(N):
    with pytest.raises(PlaneError):
        ModulusContext(N)


def test_rejects_non_integer():
    with pytest.raises(PlaneError):
        ModulusContext(7.0)
    with pytest.raises(PlaneError):
        ModulusContext(True)


@pytest.mark.parametrize("N", [3, 5, 7, 31, 101, 199, 1009])
def test_half_inverse(N):
    ctx = ModulusContext(N)
    assert ctx.half_inv == (N + 1) // 2
    assert (2 * ctx.half_inv) % N == 1


def test_is_prime_small():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_unit_root_examples():
    ctx = ModulusContext(5)
    assert unit_root(ctx, 0) == 1 + 0j
    assert abs(unit_root(ctx, 5) - 1) < 1e-15
    assert abs(unit_root(ctx, 1) - (0.309017 + 0.951057j)) < 1e-6
    assert abs(unit_root(ctx, 1) - complex(math.cos(2 * math.pi / 5), math.sin(2 * math.pi / 5))) < 1e-15


def test_unit_root_array_and_large_arguments():
    ctx = ModulusContext(7)
    t = np.array([0, 1, 7, 8, -1, 10 ** 15 + 3])
    out = unit_root(ctx, t)
    ref = np.exp(2j * np.pi * (t % 7) / 7)
    assert np.allclose(out, ref, atol=1e-14)


def test_unit_root_is_a_character():
    ctx = ModulusContext(101)
    rng = np.random.default_rng(4)
    for s, t in rng.integers(-10 ** 6, 10 ** 6, size=(100, 2)):
        assert abs(unit_root(ctx, s + t) - unit_root(ctx, s) * unit_root(ctx, t)) < 1e-12


def test_line_points_examples():
    ctx = ModulusContext(5)
    assert line_points(ctx, Line(0)) == [(0, 0), (1, 0), (2, 0), (3, 0), (4, 0)]
    assert line_points(ctx, Line(INFINITY)) == [(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]
    assert line_points(ctx, Line(2)) == [(0, 0), (1, 2), (2, 4), (3, 1), (4, 3)]


def test_there_are_N_plus_one_lines_each_with_N_distinct_points():
    ctx = ModulusContext(7)
    lines = ctx.all_lines()
    assert len(set(lines)) == 8
    for L in lines:
        pts = line_points(ctx, L)
        assert len(set(pts)) == 7
        assert all(on_line(ctx, L, p) for p in pts)


def test_contains_examples():
    ctx = ModulusContext(5)
    diag2 = AffineLine(ctx, Line(2))
    assert contains(diag2, PlanePoint(2, 4))
    assert not contains(diag2, PlanePoint(2, 3))
    assert contains(AffineLine(ctx, Line(INFINITY), PlanePoint(1, 0)), PlanePoint(1, 3))


def test_symplectic_examples():
    c5, c7 = ModulusContext(5), ModulusContext(7)
    assert symplectic(c5, PlanePoint(1, 0), PlanePoint(0, 1)) == 1
    assert symplectic(c5, PlanePoint(3, 2), PlanePoint(3, 2)) == 0
    assert symplectic(c7, PlanePoint(2, 3), PlanePoint(4, 1)) == 4


def test_symplectic_antisymmetric():
    ctx = ModulusContext(7)
    pts = [PlanePoint(a, b) for a in range(7) for b in range(7)]
    for v, w in itertools.product(pts, pts):
        assert symplectic(ctx, v, w) == (-symplectic(ctx, w, v)) % 7


def test_intersect_examples():
    c5, c7 = ModulusContext(5), ModulusContext(7)
    assert intersect(AffineLine(c5, Line(0)), AffineLine(c5, Line(INFINITY))) == (0, 0)
    assert intersect(AffineLine(c5, Line(1)), AffineLine(c5, Line(1), PlanePoint(0, 1))) is PARALLEL
    assert intersect(AffineLine(c7, Line(2)), AffineLine(c7, Line(INFINITY), PlanePoint(3, 0))) == (3, 6)
    same = AffineLine(c5, Line(1), PlanePoint(2, 2))
    assert intersect(AffineLine(c5, Line(1)), same) is COINCIDENT


def test_affine_line_equality_is_by_coset():
    ctx = ModulusContext(7)
    a = AffineLine(ctx, Line(3), PlanePoint(1, 1))
    b = AffineLine(ctx, Line(3), PlanePoint(2, 4))     # (1,1) + (1,3)
    c = AffineLine(ctx, Line(3), PlanePoint(2, 5))
    assert a == b and hash(a) == hash(b)
    assert a != c
    assert a != AffineLine(ctx, Line(4), PlanePoint(1, 1))


def test_affine_index_of_round_trip_and_error():
    ctx = ModulusContext(11)
    line = AffineLine(ctx, Line(5), PlanePoint(3, 7))
    for k in range(11):
        assert line.index_of(line.point(k)) == k
    with pytest.raises(PlaneError):
        line.index_of(PlanePoint(3, 8))


def test_exactly_one_line_through_two_points_exhaustive_N5():
    ctx = ModulusContext(5)
    pts = [PlanePoint(a, b) for a in range(5) for b in range(5)]
    affine = {AffineLine(ctx, L, p) for L in ctx.all_lines() for p in pts}
    assert len(affine) == 6 * 5
    for p, q in itertools.combinations(pts, 2):
        through = [A for A in affine if contains(A, p) and contains(A, q)]
        assert len(through) == 1


@pytest.mark.parametrize("N", [5, 7])
def test_distinct_lines_meet_only_at_origin(N):
    ctx = ModulusContext(N)
    for L, M in itertools.combinations(ctx.all_lines(), 2):
        common = set(line_points(ctx, L)) & set(line_points(ctx, M))
        assert common == {PlanePoint(0, 0)}


def test_symplectic_zero_iff_common_line_exhaustive_N5():
    ctx = ModulusContext(5)
    pts = [PlanePoint(a, b) for a in range(5) for b in range(5)]
    for v, w in itertools.product(pts, pts):
        shared = any(on_line(ctx, L, v) and on_line(ctx, L, w) for L in ctx.all_lines())
        assert (symplectic(ctx, v, w) == 0) == shared


def test_decompose_sums_back():
    ctx = ModulusContext(13)
    for L, M in itertools.permutations([Line(0), Line(INFINITY), Line(4)], 2):
        for tau in range(13):
            for omega in range(0, 13, 3):
                v = PlanePoint(tau, omega)
                l, m = decompose(ctx, v, L, M)
                assert on_line(ctx, L, l) and on_line(ctx, M, m)
                assert ctx.add(l, m) == v
    with pytest.raises(PlaneError):
        decompose(ctx, PlanePoint(1, 1), Line(2), Line(2))
