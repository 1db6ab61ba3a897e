import math

import numpy as np
import pytest

from conftest import random_sequence
from ddchannel.ambiguity import heisenberg_apply
from ddchannel.channel import (ChannelError, ChannelSpec, NoiseModel, OffGridError, PathParam,
                               add_noise, apply_channel, noise_envelope, noise_sigma_sq,
                               parse_scenario, format_scenario, physical_to_digital, random_channel)
from ddchannel.plane import ModulusContext, PlanePoint, unit_root
from ddchannel.sequences import Sequence

C5, C7 = ModulusContext(5), ModulusContext(7)


def one_path(ctx, alpha, tau, omega):
    return ChannelSpec(ctx, (PathParam(alpha, tau, omega),))


def test_apply_channel_examples(rng):
    S = random_sequence(C5, rng)
    assert np.allclose(apply_channel(one_path(C5, 1, 0, 0), S).values, S.values)
    d = Sequence(C5, np.eye(5)[0])
    assert np.allclose(apply_channel(one_path(C5, 1, 1, 0), d).values, np.eye(5)[1])
    flat = Sequence(C5, np.ones(5) / math.sqrt(5))
    out = apply_channel(one_path(C5, 0.7, 0, 1), flat).values
    assert np.allclose(out, 0.7 * unit_root(C5, np.arange(5)) / math.sqrt(5), atol=1e-15)


def test_spec_validation():
    with pytest.raises(ChannelError):
        ChannelSpec(C5, ())
    with pytest.raises(ChannelError):
        ChannelSpec(C5, (PathParam(0.5, 1, 1), PathParam(0.5, 6, 1)))
    with pytest.raises(ChannelError):
        ChannelSpec(C5, (PathParam(0.8, 1, 1), PathParam(0.8, 2, 1)))
    with pytest.raises(ChannelError):
        apply_channel(one_path(C5, 1, 0, 0), Sequence(C7, np.ones(7)))
    with pytest.raises(ChannelError):
        NoiseModel(0.0)


def test_linearity(rng):
    spec = random_channel(C7, 3, 5)
    S1, S2 = random_sequence(C7, rng), random_sequence(C7, rng)
    a, b = 0.3 - 1.1j, 2.0
    lhs = apply_channel(spec, S1 * a + S2 * b).values
    rhs = a * apply_channel(spec, S1).values + b * apply_channel(spec, S2).values
    assert np.max(np.abs(lhs - rhs)) < 1e-10


def test_channel_is_a_heisenberg_combination(rng):
    h = C7.half_inv
    for seed in range(10):
        spec = random_channel(C7, 3, seed)
        S = random_sequence(C7, rng)
        composed = sum(p.alpha * unit_root(C7, (h * p.tau * p.omega) % 7)
                       * heisenberg_apply(PlanePoint(p.tau, p.omega), S).values for p in spec.paths)
        assert np.max(np.abs(apply_channel(spec, S).values - composed)) < 1e-10


def test_energy_bound(rng):
    for seed in range(20):
        spec = random_channel(C7, 1 + seed % 5, seed)
        S = random_sequence(C7, rng, unit=False)
        assert apply_channel(spec, S).norm() <= sum(abs(p.alpha) for p in spec.paths) * S.norm() + 1e-12


def test_add_noise_examples(rng):
    c = ModulusContext(101)
    R = random_sequence(c, rng)
    assert np.max(np.abs(add_noise(R, 1.0, NoiseModel(1e12, 3)).values - R.values)) < 1e-5
    a, b = add_noise(R, 1.0, NoiseModel(2.0, 9)), add_noise(R, 1.0, NoiseModel(2.0, 9))
    assert np.array_equal(a.values, b.values)
    assert add_noise(R, 1.0, NoiseModel(math.inf)) is R
    with pytest.raises(ChannelError):
        add_noise(R, 0.0, NoiseModel(1.0))


def test_noise_energy_matches_snr():
    c = ModulusContext(1009)
    zero = Sequence.zeros(c)
    energies = [add_noise(zero, 1.0, NoiseModel(1.0, s)).norm_sq() for s in range(200)]
    assert abs(np.mean(energies) - 1) < 0.05


def test_noise_statistics():
    c = ModulusContext(1009)
    w = np.concatenate([add_noise(Sequence.zeros(c), 1.0, NoiseModel(4.0, s)).values for s in range(20)])
    sigma_sq = noise_sigma_sq(c, 1.0, 4.0)
    assert w.size >= 10 ** 4
    assert abs(np.mean(np.abs(w) ** 2) / sigma_sq - 1) < 0.05
    bound = 3 * math.sqrt(sigma_sq / w.size)
    assert abs(w.mean().real) < bound and abs(w.mean().imag) < bound


def test_random_channel_examples():
    one = random_channel(C7, 1, 0)
    assert one.r == 1 and sum(abs(p.alpha) ** 2 for p in one.paths) <= 1
    assert random_channel(C7, 4, 3) == random_channel(C7, 4, 3)
    c31 = ModulusContext(31)
    for seed in range(1000):
        spec = random_channel(c31, 10, seed)
        assert len(set(spec.points())) == 10


def test_random_channel_magnitudes_and_errors():
    c = ModulusContext(31)
    spec = random_channel(c, 4, 2, min_alpha=0.5)
    assert all(abs(abs(p.alpha) - 0.5) < 1e-12 for p in spec.paths)
    spec = random_channel(c, 4, 2)
    assert all(0.15 - 1e-12 <= abs(p.alpha) <= 0.5 + 1e-12 for p in spec.paths)
    for r, m in ((0, None), (31 * 31 + 1, None), (4, 0.6), (4, 0.0)):
        with pytest.raises(ChannelError):
            random_channel(c, r, 1, m)


def test_physical_to_digital_examples():
    c = ModulusContext(199)
    assert physical_to_digital(0.0, 0.0, 1e6, c) == (0, 0)
    assert physical_to_digital(50e-6, 150 / 199 * 1e6, 1e6, c) == (50, 150)
    assert physical_to_digital(250e-6, 0.0, 1e6, c) == (51, 0)
    with pytest.raises(OffGridError):
        physical_to_digital(1.5e-6, 0.0, 1e6, c)


def test_noise_envelope_examples():
    c = ModulusContext(1009)
    assert abs(noise_envelope(c, 1.0) - math.sqrt(2 * 1.933) / math.sqrt(1009)) < 1e-4
    # ln ln 1009 = 1.9327..., so the value is 0.0619 to four places
    assert abs(noise_envelope(c, 1.0) - 0.0619) < 5e-5
    assert abs(noise_envelope(c, 4.0) - noise_envelope(c, 1.0) / 2) < 1e-15
    with pytest.raises(ChannelError):
        noise_envelope(ModulusContext(13), 1.0)


def test_scenario_round_trip():
    spec = random_channel(ModulusContext(101), 5, 7)
    back = parse_scenario(format_scenario(spec))
    assert back == spec
    with pytest.raises(ChannelError):
        parse_scenario("N=5 r=2\n1 0 0 0\n")
    with pytest.raises(ChannelError):
        parse_scenario("N=5 r=1\n1 0 0\n")
