import numpy as np
import pandas as pd
import pytest

from symuniv.errors import (ContourViolationError, HypothesisViolationError,
                            InvalidArgumentError, NonVanishingViolationError, OutOfRegionError,
                            ResolutionError)
from symuniv.kinds import KIND_CONFIGS, LKind, RankinSelberg, Sym
from symuniv.lvalue import eval_L, smoothed_grid
from symuniv.universality import (DiscRegion, constant_target, derivative_vector,
                                  good_set_stability, jet_target, poly_exp_target, shift_grid,
                                  shift_search, sup_dist, target_from_csv, target_jets,
                                  vector_target_search)


@pytest.mark.parametrize("label", list(KIND_CONFIGS))
def test_default_discs_inside_strip(label):
    kind = LKind.parse(label)
    disc = DiscRegion.for_kind(kind)
    assert disc.center - disc.radius > kind.sigma_F
    assert disc.center + disc.radius < 1


def test_disc_validation():
    with pytest.raises(OutOfRegionError):
        DiscRegion.for_kind(Sym(2), center=0.7, radius=0.05)
    with pytest.raises(OutOfRegionError):
        DiscRegion.for_kind(RankinSelberg(1), center=0.98, radius=0.05)
    with pytest.raises(InvalidArgumentError):
        DiscRegion(0.8, 0.0)
    boundary = DiscRegion(0.85, 0.05).boundary(128)
    assert boundary.size == 128
    assert np.allclose(np.abs(boundary - 0.85), 0.05)


def test_poly_exp_fit_is_exact_for_polynomial_logs():
    disc = DiscRegion(0.85, 0.05)
    z = disc.boundary(128)
    u = (z - 0.85) / 0.05
    values = np.exp(0.3 + 0.5j + (1 - 2j) * u + 0.25 * u ** 2)
    target = poly_exp_target(z, values)
    assert target.residual < 1e-10
    assert target(0.85) == pytest.approx(np.exp(0.3 + 0.5j))


def test_poly_exp_fit_rejects_bad_targets():
    z = DiscRegion(0.85, 0.05).boundary(64)
    with pytest.raises(NonVanishingViolationError):
        poly_exp_target(z, np.where(np.arange(64) == 5, 0, 1.0 + 0j))
    with pytest.raises(HypothesisViolationError):
        poly_exp_target(z, z - 0.85)
    coarse = np.exp(2.0j * np.arange(20))
    with pytest.raises(ResolutionError):
        poly_exp_target(np.arange(20) + 0j, coarse, closed=False)
    with pytest.raises(InvalidArgumentError):
        poly_exp_target(z[:10], np.ones(10))


def test_sup_dist():
    disc = DiscRegion(0.85, 0.05)
    assert sup_dist(lambda s: s, lambda s: s, disc) == 0.0
    assert sup_dist(lambda s: s, lambda s: np.full_like(s, 0.85), disc) == pytest.approx(0.05)
    with pytest.raises(InvalidArgumentError):
        sup_dist(lambda s: s, lambda s: s, disc, n_boundary=32)


def test_shift_grid():
    assert np.allclose(shift_grid(1.0, 0.25), [0.0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(InvalidArgumentError):
        shift_grid(1.0, 0.0)


def test_constant_target():
    assert np.allclose(constant_target(2.0)(np.array([0.8, 0.9])), [2.0, 2.0])
    with pytest.raises(NonVanishingViolationError):
        constant_target(0)


def _hidden(f, kind, t0, X):
    return lambda z: smoothed_grid(f, kind, z, [t0], X)[:, 0]


def test_hidden_shift_is_recovered(delta):
    kind = Sym(2)
    disc = DiscRegion.for_kind(kind)
    T, dt, X = 10.0, 0.05, 50.0
    t0 = float(shift_grid(T, dt)[137])
    result = shift_search(delta, kind, disc, _hidden(delta, kind, t0, X), T, dt, 0.5, X=X)
    assert result.best_t == t0
    assert result.best_err < 1e-3
    assert 0 < result.good_set_measure <= 1
    assert len(result.table) == 201
    threaded = shift_search(delta, kind, disc, _hidden(delta, kind, t0, X), T, dt, 0.5, X=X,
                            n_jobs=2)
    assert np.allclose(threaded.table["sup_err"], result.table["sup_err"], rtol=0, atol=1e-12)
    assert good_set_stability(result, threaded) == 0.0
    assert result.to_dict()["grid"] == {"T": T, "dt": dt, "n_boundary": 128}


def test_shift_search_rejects_vanishing_target(delta):
    disc = DiscRegion.for_kind(Sym(2))
    with pytest.raises(HypothesisViolationError):
        shift_search(delta, Sym(2), disc, lambda z: z - disc.center, 5.0, 0.05, 0.3)


def test_shift_search_table_csv(tmp_path, delta):
    disc = DiscRegion.for_kind(Sym(1))
    result = shift_search(delta, Sym(1), disc, constant_target(1.0), 5.0, 0.1, 0.3)
    path = tmp_path / "table.csv"
    result.to_csv(str(path))
    table = pd.read_csv(path)
    assert list(table.columns) == ["t", "sup_err"]
    assert table["sup_err"].min() == pytest.approx(result.best_err)


def test_derivative_vector_matches_finite_differences(delta):
    kind = Sym(2)
    sigma, t, X, h = 0.85, 3.7, 50.0, 1e-5
    jets = derivative_vector(delta, kind, sigma, t, 3, X=X)
    values = smoothed_grid(delta, kind, [sigma - h, sigma, sigma + h], [t], X)[:, 0]
    assert jets[0] == pytest.approx(values[1], abs=1e-10)
    assert abs(jets[1] - (values[2] - values[0]) / (2 * h)) < 1e-6


def test_derivative_vector_contour_checks(delta):
    with pytest.raises(ContourViolationError):
        derivative_vector(delta, Sym(2), 0.85, 0.0, 2, rho=0.2)
    with pytest.raises(ContourViolationError):
        derivative_vector(delta, RankinSelberg(1), 0.95, 0.0, 2, rho=0.08)
    with pytest.raises(InvalidArgumentError):
        derivative_vector(delta, Sym(2), 0.85, 0.0, 0)


def test_hidden_jets_are_recovered(delta):
    kind = Sym(2)
    sigma, T, dt, X = 0.85, 10.0, 0.05, 50.0
    t0 = float(shift_grid(T, dt)[91])
    target = derivative_vector(delta, kind, sigma, t0, 3, X=X)
    found = vector_target_search(delta, kind, sigma, target, T, dt, X=X)
    assert found["best_t"] == t0
    assert found["distance"] < 1e-3
    with pytest.raises(InvalidArgumentError):
        vector_target_search(delta, kind, sigma, np.ones(6), T, dt, X=X)
    with pytest.raises(OutOfRegionError):
        vector_target_search(delta, kind, 0.6, target, T, dt, X=X)


def test_jet_target_roundtrip():
    jets = np.array([2.0 + 0.5j, 0.5, -0.3j])
    target = jet_target(jets, 0.85)
    assert np.allclose(target_jets(target, Sym(2), 0.85, 3), jets, atol=1e-8)
    with pytest.raises(NonVanishingViolationError):
        jet_target([0.0, 1.0], 0.85)


def test_target_from_csv(tmp_path):
    z = DiscRegion(0.85, 0.05).boundary(128)
    phi = np.exp(0.1 * (z - 0.85) + 0.2j)
    path = tmp_path / "target.csv"
    pd.DataFrame({"re": z.real, "im": z.imag, "phi_re": phi.real, "phi_im": phi.imag}).to_csv(
        path, index=False)
    target = target_from_csv(str(path))
    assert target.residual < 1e-10
    pd.DataFrame({"re": z.real}).to_csv(path, index=False)
    with pytest.raises(InvalidArgumentError):
        target_from_csv(str(path))


def test_poly_exp_fit_with_noise():
    rng = np.random.default_rng(12)
    disc = DiscRegion(0.85, 0.05)
    z = disc.boundary(128)
    u = (z - 0.85) / 0.05
    q = rng.uniform(-0.2, 0.2, 4) + 1j * rng.uniform(-0.2, 0.2, 4)
    noise = 1e-6 * np.exp(2j * np.pi * rng.random(128))
    target = poly_exp_target(z, np.exp(np.polynomial.polynomial.polyval(u, q)) + noise)
    assert target.residual <= 1e-5


def test_poly_exp_fit_of_constant():
    z = DiscRegion(0.85, 0.05).boundary(128)
    target = poly_exp_target(z, np.full(128, 2.5 - 1.0j))
    assert target.residual < 1e-12
    assert target(0.87) == pytest.approx(2.5 - 1.0j)


def test_sup_dist_is_a_pseudometric():
    disc = DiscRegion(0.85, 0.05)
    f = np.exp

    def g(s):
        return 1 + s + s ** 2 / 2

    def h(s):
        return np.cos(3 * s) + 2.0

    assert sup_dist(f, g, disc) == sup_dist(g, f, disc)
    assert sup_dist(f, h, disc) <= sup_dist(f, g, disc) + sup_dist(g, h, disc)
    assert sup_dist(g, h, disc) <= sup_dist(g, f, disc) + sup_dist(f, h, disc)


def test_derivative_vector_is_linear(delta):
    kind = Sym(2)
    sigma, t0, X = 0.85, 4.2, 50.0
    L = _hidden(delta, kind, t0, X)
    jets = target_jets(L, kind, sigma, 4)
    a = 2.5 - 0.75j
    scaled = target_jets(lambda z: a * L(z), kind, sigma, 4)
    assert np.allclose(scaled, a * jets, rtol=1e-12, atol=1e-12)
    assert np.allclose(jets, derivative_vector(delta, kind, sigma, t0, 4, X=X),
                       rtol=0, atol=1e-12)


@pytest.mark.parametrize("kind, t", [(Sym(2), 3.0), (Sym(2), 40.0), (Sym(1), 25.0)], ids=str)
def test_first_jet_matches_eval_L(delta, kind, t):
    sigma = DiscRegion.for_kind(kind).center
    jets = derivative_vector(delta, kind, sigma, t, 1)
    assert abs(jets[0] - eval_L(delta, kind, complex(sigma, t)).value) < 1e-9


def test_good_set_measure_limits(delta):
    disc = DiscRegion.for_kind(Sym(1))
    measures = [shift_search(delta, Sym(1), disc, constant_target(1.0), 5.0, 0.1, eps)
                .good_set_measure for eps in (0.0, 0.2, 0.5, 1.0, 1e3)]
    assert measures[0] == 0.0
    assert measures[-1] == 1.0
    assert measures == sorted(measures)
