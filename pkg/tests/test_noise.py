import math

import numpy as np
import pytest

from lipinterp.errors import CapabilityError, ConfigurationError
from lipinterp.noise import (NoiseModel, boundary_mass, empirical_eta_check, make_power_boundary,
                             make_truncated_gaussian, make_uniform, make_weibull_mixture, noise_from_config,
                             sample_noise)

ALL_KINDS = [
    make_uniform(0.5),
    make_power_boundary(0.5, 0.5),
    make_power_boundary(1.0, 3.0),
    make_truncated_gaussian(0.5),
    make_truncated_gaussian(0.5, sigma=2.0),
    make_weibull_mixture(0.5, shape=2.0),
]


def test_uniform_bounded_and_centred():
    draws = make_uniform(0.5).sample(np.random.default_rng(0), 10 ** 6)
    assert draws.min() >= -0.5 and draws.max() <= 0.5
    # 3 sigma / sqrt(N) with sigma = 0.5 / sqrt(3)
    assert abs(draws.mean()) <= 3 * (0.5 / math.sqrt(3)) / 1000
    assert abs(draws.mean()) <= 0.002


@pytest.mark.parametrize("eta", [0.3, 1.0, 2.0, 7.0])
def test_power_boundary_bounded(eta):
    draws = make_power_boundary(1.0, eta).sample(np.random.default_rng(1), 10 ** 5)
    assert np.abs(draws).max() <= 1.0


def test_truncated_gaussian_bounded():
    draws = make_truncated_gaussian(0.5).sample(np.random.default_rng(2), 10 ** 5)
    assert np.abs(draws).max() <= 0.5


@pytest.mark.parametrize("model", ALL_KINDS, ids=lambda m: f"{m.kind}-{m.eta}")
def test_support_for_every_kind(model):
    draws = model.sample(np.random.default_rng(3), 10 ** 6)
    assert draws.min() >= -model.e_bar and draws.max() <= model.e_bar


def test_support_is_tight_for_eta_at_most_one():
    for model in (make_uniform(0.5), make_power_boundary(0.5, 0.5), make_truncated_gaussian(0.5)):
        draws = model.sample(np.random.default_rng(4), 10 ** 6)
        assert draws.max() > model.e_bar - model.e_bar / 100
        assert draws.min() < -model.e_bar + model.e_bar / 100


@pytest.mark.parametrize("model", ALL_KINDS, ids=lambda m: f"{m.kind}-{m.eta}")
def test_reproducible(model):
    a = model.sample(np.random.default_rng(7), 1000)
    b = model.sample(np.random.default_rng(7), 1000)
    assert a.tobytes() == b.tobytes()


def test_single_draw_and_noiseless():
    rng = np.random.default_rng(0)
    assert isinstance(sample_noise(make_uniform(1.0), rng), float)
    assert sample_noise(None, rng) == 0.0
    np.testing.assert_array_equal(sample_noise(None, rng, 3), np.zeros(3))


def test_boundary_mass_examples():
    assert boundary_mass(make_uniform(0.5), 0.1) == pytest.approx(0.1, abs=1e-15)
    assert boundary_mass(make_power_boundary(1.0, 2.0), 0.1) == pytest.approx(0.005, abs=1e-15)
    for eta in (0.5, 1.0, 3.0):
        assert boundary_mass(make_power_boundary(0.7, eta), 0.7) == 0.5
        assert boundary_mass(make_power_boundary(0.7, eta), 1.4) == pytest.approx(1.0, abs=1e-15)


def test_make_power_boundary_examples():
    assert boundary_mass(make_power_boundary(1.0, 2.0), 0.2) == pytest.approx(0.02, abs=1e-15)
    assert boundary_mass(make_power_boundary(1.0, 0.5), 0.01) == pytest.approx(0.05, abs=1e-15)
    m = make_power_boundary(2.0, 3.0)
    assert m.gamma == 1.0 / (2.0 * 2.0 ** 3)


def test_power_boundary_eta_one_is_uniform():
    # compare empirical CDFs at a few points against the uniform CDF, 4 sigma band
    draws = make_power_boundary(1.0, 1.0).sample(np.random.default_rng(5), 200_000)
    for t in (-0.9, -0.5, 0.0, 0.3, 0.8):
        p = (t + 1.0) / 2.0
        assert abs(np.mean(draws <= t) - p) <= 4 * math.sqrt(p * (1 - p) / len(draws))


def test_boundary_mass_beyond_half_matches_sampling():
    m = make_power_boundary(1.0, 2.0)
    draws = m.sample(np.random.default_rng(6), 10 ** 6)
    for eps in (1.2, 1.5, 1.9):
        p = boundary_mass(m, eps)
        assert abs(np.mean(draws > 1.0 - eps) - p) <= 4 * math.sqrt(p * (1 - p) / len(draws))


def test_boundary_mass_unsupported_kind():
    with pytest.raises(CapabilityError):
        boundary_mass(make_truncated_gaussian(0.5), 0.1)


def test_boundary_mass_range():
    with pytest.raises(ConfigurationError):
        boundary_mass(make_uniform(0.5), 1.5)


@pytest.mark.parametrize("e_bar, eta", [(0.0, 1.0), (-1.0, 1.0), (1.0, 0.0), (1.0, -2.0)])
def test_make_power_boundary_rejects(e_bar, eta):
    with pytest.raises(ConfigurationError):
        make_power_boundary(e_bar, eta)


def test_eta_check_uniform_passes():
    rng = np.random.default_rng(8)
    report = empirical_eta_check(make_uniform(0.5), 10 ** 6, [0.1], rng, eta=1.0, gamma=1.0)
    assert report.passed
    assert report.rows[0].upper_freq == pytest.approx(0.1, abs=0.002)


def test_eta_check_detects_wrong_exponent():
    rng = np.random.default_rng(9)
    m = make_power_boundary(1.0, 3.0)
    report = empirical_eta_check(m, 10 ** 6, [0.05, 0.1], rng, eta=1.0, gamma=0.5)
    assert not report.passed


def test_eta_check_full_width_epsilon():
    rng = np.random.default_rng(10)
    for m in (make_uniform(0.5), make_power_boundary(0.5, 2.0)):
        report = empirical_eta_check(m, 10 ** 4, [2 * m.e_bar], rng)
        assert report.rows[0].upper_freq == 1.0 and report.passed


def test_eta_check_needs_enough_draws():
    with pytest.raises(ConfigurationError):
        empirical_eta_check(make_uniform(0.5), 100, [0.1], np.random.default_rng(0))


def test_eta_check_without_gamma():
    with pytest.raises(CapabilityError):
        empirical_eta_check(make_truncated_gaussian(0.5), 10 ** 4, [0.1], np.random.default_rng(0))


def test_config_records():
    assert noise_from_config(None) is None
    assert noise_from_config({"kind": "uniform", "e_bar": 2.0}) == make_uniform(2.0)
    assert noise_from_config({"kind": "power_boundary", "e_bar": 1.0, "eta": 3}) == make_power_boundary(1.0, 3)
    assert noise_from_config({"kind": "truncated_gaussian", "e_bar": 1.0}).sigma == 1.0
    assert noise_from_config({"kind": "weibull_mixture", "e_bar": 1.0, "params": {"shape": 3.0}}).eta == 3.0
    with pytest.raises(ConfigurationError):
        noise_from_config({"kind": "cauchy", "e_bar": 1.0})
    with pytest.raises(ConfigurationError):
        NoiseModel("uniform", 0.0)
