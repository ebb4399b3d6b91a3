import math

import numpy as np
import pandas as pd
import pytest

from symuniv.errors import (CacheIntegrityError, DeligneViolationError, InsufficientCacheError,
                            InvalidArgumentError, UnsupportedWeightError)
from symuniv.modform import (HeckeEigenform, QSeries, chebyshev_u, find_cached_form,
                             hecke_relation_failures, lambda_prime_power, load_form,
                             load_or_build_form, qexp_delta, qexp_delta_product,
                             qexp_delta_product_exact, qexp_newform, satake_angle,
                             sato_tate_statistics, save_form, truncate_form)
from symuniv.prime_stats import sieve_primes

TAU = [0, 1, -24, 252, -1472, 4830, -6048, -16744, 84480, -113643, -115920, 534612, -370944]


def _schoolbook(a, b, N):
    out = [0] * (N + 1)
    for i in range(N + 1):
        for j in range(N + 1 - i):
            out[i + j] += a[i] * b[j]
    return out


def test_delta_matches_ramanujan_tau():
    assert qexp_delta(12).coeffs == TAU


def test_qseries_product_is_exact_for_large_integers():
    rng = np.random.default_rng(0)
    N = 60
    a = [int(x) * 10 ** 30 + 7 for x in rng.integers(-1000, 1000, N + 1)]
    b = [int(x) * 10 ** 25 - 3 for x in rng.integers(-1000, 1000, N + 1)]
    product = QSeries(a, N) * QSeries(b, N)
    assert product.coeffs == _schoolbook(a, b, N)
    assert product.N == N


def test_qseries_power_matches_repeated_products():
    s = QSeries([1, -3, 5, 0, 2, -1, 7], 30)
    expected = QSeries.one(30)
    for _ in range(5):
        expected = expected * s
    assert s ** 5 == expected
    assert s ** 0 == QSeries.one(30)
    with pytest.raises(InvalidArgumentError):
        s ** -1


def test_qseries_truncation_is_consistent():
    s = QSeries([1, 2, 3, 4, 5], 4)
    assert (s * s).truncate(2) == s.truncate(2) * s.truncate(2)
    assert s.shift(2).coeffs == [0, 0, 1, 2, 3]


def test_dual_route_delta_agrees():
    N = 1000
    exact = qexp_delta_product_exact(N)
    assert exact.coeffs == qexp_delta(N).coeffs
    assert exact.coeffs[:13] == TAU
    assert exact.max_abs() > 2 ** 40


def test_product_route_residues_match_exact():
    modulus = 2_147_483_647
    exact = qexp_delta_product_exact(200)
    assert np.array_equal(exact.residues(modulus), qexp_delta_product(200, modulus))


def test_other_weights_first_coefficients(form16, form18):
    assert [form16.c(n) for n in range(1, 5)] == [1, 216, -3348, 13888]
    assert [form18.c(n) for n in range(1, 4)] == [1, -528, -4284]


@pytest.mark.parametrize("k", [10, 14, 24, 28])
def test_unsupported_weight(k):
    with pytest.raises(UnsupportedWeightError):
        qexp_newform(k, 10)


def test_invalid_truncation():
    with pytest.raises(InvalidArgumentError):
        qexp_delta(0)
    with pytest.raises(InvalidArgumentError):
        qexp_newform(12, 0)


@pytest.mark.parametrize("k", [12, 16])
def test_hecke_relation_holds(k):
    assert hecke_relation_failures(qexp_newform(k, 300), 300) == []


def test_normalized_coefficients(delta_small):
    assert delta_small.lam(1) == 1.0
    assert delta_small.lam(2) == pytest.approx(-24 / 2 ** 5.5, abs=1e-15)
    assert delta_small.lam(2) == pytest.approx(-0.530330085889911, abs=1e-12)


def test_deligne_bound(delta_small):
    primes = sieve_primes(delta_small.N)
    assert np.abs(delta_small.normalized[primes]).max() <= 2 + 1e-12


def test_satake_angles(delta_small):
    for p in sieve_primes(200):
        angle = satake_angle(delta_small, int(p))
        assert 0 <= angle.theta <= math.pi
        assert 2 * math.cos(angle.theta) == pytest.approx(delta_small.lam(int(p)), abs=1e-12)
        assert abs(angle.alpha) == pytest.approx(1.0)


def test_satake_angles_reject_corrupted_data(delta_small):
    normalized = delta_small.normalized.copy()
    normalized[3] = 2.5
    broken = HeckeEigenform(12, delta_small.exact_coeffs, normalized)
    with pytest.raises(DeligneViolationError):
        broken.satake_angles(np.array([2, 3, 5]))


def test_require_beyond_truncation(delta_small):
    with pytest.raises(InsufficientCacheError):
        delta_small.satake_angles(np.array([2003]))


def test_chebyshev_u():
    x = np.cos(np.linspace(0.1, 3.0, 7))
    theta = np.arccos(x)
    for nu in range(5):
        assert np.allclose(chebyshev_u(nu, x), np.sin((nu + 1) * theta) / np.sin(theta))


@pytest.mark.parametrize("p, nu_max", [(2, 10), (3, 6), (5, 4), (7, 3)])
def test_lambda_prime_power_matches_exact_coefficients(delta_small, p, nu_max):
    for nu in range(nu_max + 1):
        assert lambda_prime_power(delta_small, p, nu) == pytest.approx(
            delta_small.lam(p ** nu), abs=1e-9)


def test_cache_roundtrip(tmp_path, delta_small):
    path = save_form(delta_small, str(tmp_path))
    loaded = load_form(path)
    assert loaded.exact_coeffs == delta_small.exact_coeffs
    assert np.allclose(loaded.normalized, delta_small.normalized, rtol=1e-15, atol=0)


def test_cache_checksum_mismatch(tmp_path, caplog):
    f = qexp_newform(12, 50)
    path = save_form(f, str(tmp_path))
    df = pd.read_csv(path, dtype={"c_exact": str})
    df.loc[4, "c_exact"] = "4831"
    df.to_csv(path, index=False)
    with pytest.raises(CacheIntegrityError):
        load_form(path)
    assert load_form(path, verify_checksum=False).c(5) == 4831
    with pytest.raises(CacheIntegrityError):
        load_or_build_form(12, 50, str(tmp_path), rebuild_on_mismatch=False)
    rebuilt = load_or_build_form(12, 50, str(tmp_path))
    assert rebuilt.c(5) == 4830
    assert "rebuilding" in caplog.text


def test_cache_reuses_longer_expansion(tmp_path):
    save_form(qexp_newform(12, 100), str(tmp_path))
    save_form(qexp_newform(12, 200), str(tmp_path))
    assert find_cached_form(12, 80, str(tmp_path)).endswith("weight12_N100.csv")
    assert find_cached_form(12, 150, str(tmp_path)).endswith("weight12_N200.csv")
    assert find_cached_form(12, 300, str(tmp_path)) is None
    f = load_or_build_form(12, 80, str(tmp_path))
    assert f.N == 80
    assert f.exact_coeffs[:13] == TAU


def test_truncate_form(delta_small):
    short = truncate_form(delta_small, 12)
    assert short.exact_coeffs == TAU
    assert truncate_form(delta_small, 5000) is delta_small


def test_sato_tate_statistics(delta_small):
    stats = sato_tate_statistics(delta_small, 2000)
    assert stats["n_primes"] == 303
    assert abs(stats["mean_lambda"]) < 0.25
    assert abs(stats["mean_lambda_sq"] - 1) < 0.25
    assert stats["ks_statistic"] < 0.15
