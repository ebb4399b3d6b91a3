import math

import numpy as np
import pytest
from scipy import stats

from symuniv.errors import InvalidArgumentError, OutOfRegionError
from symuniv.kinds import RankinSelberg, Sym
from symuniv.lvalue import EULER_PRODUCT, EvalParams, eval_L
from symuniv.prime_stats import sieve_primes
from symuniv.random_model import (KS_C_001, PhaseAssignment, compare_samples, dagger_series,
                                  distribution_compare, flat_series, ks_critical_value,
                                  model_moments_reference, monte_carlo_moments, random_L,
                                  random_L_batch, sample_phases, support_check, tail_stability,
                                  truncation_orders)


def test_phases_are_deterministic():
    a = sample_phases(7, 1000)
    b = sample_phases(7, 1000)
    assert np.array_equal(a.angles, b.angles)
    assert not np.array_equal(a.angles, sample_phases(8, 1000).angles)
    assert np.allclose(np.abs(a.phases), 1.0)
    assert a.p_max == 997


def test_phases_extend_consistently():
    small = sample_phases(3, 1000)
    large = sample_phases(3, 10_000)
    assert np.array_equal(large.angles[:small.angles.size], small.angles)


def test_omega_is_completely_multiplicative():
    omega = sample_phases(1, 100)
    assert omega.omega(12) == pytest.approx(omega.omega(2) ** 2 * omega.omega(3))
    assert omega.omega(1) == 1
    with pytest.raises(InvalidArgumentError):
        omega.omega(2 * 101)


def test_truncation_orders():
    primes = sieve_primes(10_000)
    orders = truncation_orders(primes, 0.8, 3)
    assert orders.min() >= 1
    assert np.all(np.diff(orders) <= 0)
    assert truncation_orders(primes, 2.0, 3)[0] < orders[0]


@pytest.mark.parametrize("kind", [Sym(1), Sym(2), RankinSelberg(1)], ids=str)
def test_random_L_sample(delta, kind):
    sample = random_L(delta, kind, complex(0.8, 1.0), sample_phases(5, 10_000))
    assert sample.value != 0
    assert np.exp(sample.log_value) == pytest.approx(sample.value, rel=1e-8)
    assert sample.p_max == 9973
    assert sample.seed == 5


def test_batch_matches_single_samples(delta):
    s = complex(0.9, 0.0)
    logs = random_L_batch(delta, Sym(2), s, [11, 12, 13], 5000)
    for seed, log_value in zip([11, 12, 13], logs):
        single = random_L(delta, Sym(2), s, sample_phases(seed, 5000))
        assert log_value == pytest.approx(single.log_value, abs=1e-10)
    threaded = random_L_batch(delta, Sym(2), s, range(300), 5000, n_jobs=2)
    assert np.allclose(threaded, random_L_batch(delta, Sym(2), s, range(300), 5000),
                       rtol=0, atol=1e-12)


def test_model_region(delta):
    with pytest.raises(OutOfRegionError):
        random_L(delta, Sym(2), 0.5, sample_phases(0, 100))
    with pytest.raises(OutOfRegionError):
        model_moments_reference(delta, Sym(2), 0.4)


def test_first_order_series(delta):
    omega = sample_phases(2, 5000)
    s = complex(1.5, 0.0)
    full = random_L(delta, Sym(1), s, omega).log_value
    assert abs(dagger_series(delta, Sym(1), s, omega) - full) < 1.0
    assert np.isfinite(flat_series(delta, Sym(1), s, omega))
    with pytest.raises(InvalidArgumentError):
        flat_series(delta, Sym(1), s, omega, p0=2)


def test_moments_reference(delta):
    ref = model_moments_reference(delta, Sym(2), 0.9, 5000)
    assert ref["mean"] == 1.0
    assert ref["second_moment"] > 1.0


def test_monte_carlo_moments(delta):
    report = monte_carlo_moments(delta, Sym(2), complex(1.2, 0.0), 1000, P_max=2000)
    assert report["mean_z"] < 3
    assert report["second_moment_z"] < 3
    assert report["min_abs"] > 0
    with pytest.raises(InvalidArgumentError):
        monte_carlo_moments(delta, Sym(2), 1.2, 50, P_max=2000)


def test_ks_helpers():
    expected = stats.kstwobign.ppf(0.99) * math.sqrt(2 / 2000)
    assert ks_critical_value(2000, 2000) == pytest.approx(expected)
    assert KS_C_001 == pytest.approx(1.6276, abs=1e-4)
    a = np.exp(np.linspace(0.1, 1.0, 50) + 1j * np.linspace(-1, 1, 50))
    assert compare_samples(a, a) == {"ks_re": 0.0, "ks_im": 0.0, "ks_abs": 0.0}


def test_distribution_compare(delta):
    report, samples = distribution_compare(delta, Sym(1), complex(0.9, 0.0), 100.0, 100, 100,
                                           seed=4, P_max=1000)
    again, _ = distribution_compare(delta, Sym(1), complex(0.9, 0.0), 100.0, 100, 100,
                                    seed=4, P_max=1000)
    assert report == again
    assert len(samples) == 200
    assert set(samples["population"]) == {"shift", "model"}
    for key in ("ks_re", "ks_im", "ks_abs"):
        assert 0 <= report[key] <= 1
    assert report["ks_critical_001"] == pytest.approx(ks_critical_value(100, 100))
    with pytest.raises(InvalidArgumentError):
        distribution_compare(delta, Sym(1), 0.9, 100.0, 50, 100)
    with pytest.raises(OutOfRegionError):
        distribution_compare(delta, Sym(2), 0.6, 100.0, 100, 100)


def test_support_check(delta):
    report = support_check(delta, Sym(2), 50, sigmas=(0.75, 0.9), ts=(0.0, 1.0), P_max=2000)
    assert report["grid_points"] == 4
    assert report["all_nonzero"]
    assert report["min_abs"] > 0


def test_tail_stability(delta):
    assert tail_stability(delta, Sym(2), complex(1.5, 0.0), 9, 1000, 10_000) < 0.02
    with pytest.raises(InvalidArgumentError):
        tail_stability(delta, Sym(2), 1.5, 9, 10_000, 10_000)


def test_monte_carlo_mean_inside_strip(delta):
    report = monte_carlo_moments(delta, Sym(2), complex(0.8, 0.0), 2000, seed=100, P_max=2000)
    assert report["mean_z"] < 3
    assert report["mean_se"] > 0


@pytest.mark.parametrize("kind", [Sym(1), Sym(2), RankinSelberg(1)], ids=str)
def test_trivial_phases_give_euler_product(delta, kind):
    primes = sieve_primes(10_000)
    ones = PhaseAssignment(0, primes, np.zeros(primes.size))
    s = complex(2.0, 1.0)
    model = random_L(delta, kind, s, ones)
    euler = eval_L(delta, kind, s, EvalParams(mode=EULER_PRODUCT, P=10_000))
    assert model.value == pytest.approx(euler.value, rel=1e-10)


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_phase_mean_is_small(seed):
    phases = sample_phases(seed, 100_000).phases
    assert phases.size == 9592
    assert abs(phases.mean()) <= 3 / math.sqrt(phases.size)


def test_independent_batches_pass_ks(delta):
    n, runs = 200, 20
    s = complex(0.9, 0.0)
    critical = ks_critical_value(n, n)
    passed = 0
    for r in range(runs):
        a = np.exp(random_L_batch(delta, Sym(2), s, range(1000 * r, 1000 * r + n), 1000))
        b = np.exp(random_L_batch(delta, Sym(2), s, range(1000 * r + 500, 1000 * r + 500 + n),
                                  1000))
        passed += compare_samples(a, b)["ks_abs"] < critical
    assert passed >= 0.95 * runs
