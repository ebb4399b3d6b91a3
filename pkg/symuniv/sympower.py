# symuniv/sympower.py
"""
Local Euler factors and Dirichlet coefficients of sym^m f and of the
Rankin-Selberg square sym^m f x sym^m f.

Roots of every local factor are powers of the Satake parameter
alpha = exp(i theta), so the whole module is driven by integer exponent
lists: e^{i(m-2j)theta} for sym^m and e^{2i(m-i-j)theta} for the square.
"""
import logging
import math
import os
import weakref
from dataclasses import dataclass
from typing import Dict, List, Tuple

import mpmath
import numpy as np
import pandas as pd

from .errors import InvalidArgumentError, NumericInstabilityError
from .kinds import LKind, RankinSelberg
from .modform import HeckeEigenform, chebyshev_u
from .prime_stats import sieve_primes
from .utils import ensure_directory, provenance, write_json

logger = logging.getLogger(__name__)

IMAG_ACCEPT = 1e-10
IMAG_REJECT = 1e-8
LOG_DERIV_MAX_NU = 12

_coefficient_cache: "weakref.WeakKeyDictionary" = weakref.WeakKeyDictionary()


@dataclass(frozen=True, eq=False)
class LocalFactor:
    """D_p(x) with L_p(s) = 1 / D_p(p^{-s}); poly[j] is the coefficient of x^j."""

    p: int
    poly: np.ndarray

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    def __call__(self, x):
        return np.polynomial.polynomial.polyval(x, self.poly)

    def max_root_deviation(self) -> float:
        """max ||r| - 1| over the complex roots of D_p."""
        roots = np.polynomial.polynomial.polyroots(self.poly)
        return float(np.max(np.abs(np.abs(roots) - 1.0)))


@dataclass(frozen=True, eq=False)
class DirichletCoefficients:
    kind: LKind
    table: np.ndarray
    N: int
    weight: int

    def __getitem__(self, n: int) -> float:
        return float(self.table[n])


@dataclass(frozen=True)
class VonMangoldtRS:
    n: int
    value: float


def root_exponents(kind: LKind) -> np.ndarray:
    """Integer e with local roots exp(i e theta), with multiplicity."""
    m = kind.m
    if kind.is_rankin_selberg:
        return np.array([2 * (m - i - j) for i in range(m + 1) for j in range(m + 1)])
    return np.array([m - 2 * j for j in range(m + 1)])


def root_power_sum(theta, kind: LKind, nu: int):
    """Sum of nu-th powers of the local roots: U_m(cos nu theta), squared for the square."""
    u = chebyshev_u(kind.m, np.cos(nu * np.asarray(theta, dtype=np.float64)))
    return u * u if kind.is_rankin_selberg else u


def _expand_roots(roots: np.ndarray) -> np.ndarray:
    """Coefficients of prod_r (1 - r x), one row per row of `roots`."""
    n_rows, degree = roots.shape
    poly = np.zeros((n_rows, degree + 1), dtype=np.complex128)
    poly[:, 0] = 1.0
    for d in range(degree):
        r = roots[:, d][:, None]
        poly[:, 1:d + 2] = poly[:, 1:d + 2] - r * poly[:, 0:d + 1]
    return poly


def _realify(poly: np.ndarray, what: str) -> np.ndarray:
    residue = float(np.max(np.abs(poly.imag))) if poly.size else 0.0
    if residue > IMAG_REJECT:
        raise NumericInstabilityError(
            f"Imaginary residue {residue:.3g} in {what} exceeds {IMAG_REJECT:g}")
    if residue > IMAG_ACCEPT:
        logger.warning("Imaginary residue %.3g in %s dropped", residue, what)
    return poly.real.copy()


def local_factor_polys(theta: np.ndarray, kind: LKind) -> np.ndarray:
    """Real local factor coefficients for an array of Satake angles."""
    theta = np.atleast_1d(np.asarray(theta, dtype=np.float64))
    roots = np.exp(1j * np.outer(theta, root_exponents(kind)))
    return _realify(_expand_roots(roots), f"{kind} local factor")


def local_factor(f: HeckeEigenform, p: int, kind: LKind) -> LocalFactor:
    theta = f.satake_angles(np.array([p]))
    return LocalFactor(int(p), local_factor_polys(theta, kind)[0])


def psi_factor(f: HeckeEigenform, p: int, m: int) -> LocalFactor:
    """Local factor of Psi_{f,m}: prod_{l<m} [(1 - a^{2(m-l)} x)(1 - a^{-2(m-l)} x)]^{l+1}."""
    exponents = []
    for ell in range(m):
        exponents += [2 * (m - ell), -2 * (m - ell)] * (ell + 1)
    theta = f.satake_angles(np.array([p]))
    roots = np.exp(1j * np.outer(theta, exponents))
    return LocalFactor(int(p), _realify(_expand_roots(roots), "Psi factor")[0])


def invert_factors(polys: np.ndarray, nu_max: int) -> np.ndarray:
    """Power-series inverse of each row: b_nu = -sum_j D_j b_{nu-j}."""
    n_rows, width = polys.shape
    out = np.zeros((n_rows, nu_max + 1))
    out[:, 0] = 1.0
    for nu in range(1, nu_max + 1):
        acc = np.zeros(n_rows)
        for j in range(1, min(nu, width - 1) + 1):
            acc -= polys[:, j] * out[:, nu - j]
        out[:, nu] = acc
    return out


def fill_multiplicative(table: np.ndarray, primes: np.ndarray, prime_powers: np.ndarray) -> None:
    """In place: table[n] *= prime_powers[i, v_p(n)] for every p = primes[i] dividing n."""
    N = len(table) - 1
    for i, p in enumerate(primes):
        p = int(p)
        if p * p > N:
            table[p::p] *= prime_powers[i, 1]
            continue
        fac = np.full(len(table[p::p]), prime_powers[i, 1])
        q, nu = p, 2
        while q * p <= N:
            fac[q - 1::q] = prime_powers[i, nu]
            q *= p
            nu += 1
        table[p::p] *= fac


def dirichlet_coefficients(f: HeckeEigenform, kind: LKind, N: int) -> DirichletCoefficients:
    """lambda_F(n) for n <= N by local inversion and multiplicativity; cached per form."""
    if N < 1:
        raise InvalidArgumentError(f"Coefficient bound must be >= 1, got {N}")
    per_form = _coefficient_cache.setdefault(f, {}).setdefault("dirichlet", {})
    for (cached_kind, cached_n), coeffs in per_form.items():
        if cached_kind == kind and cached_n >= N:
            if cached_n == N:
                return coeffs
            return DirichletCoefficients(kind, coeffs.table[:N + 1], N, f.weight)
    primes = sieve_primes(N)
    f.require(N)
    theta = f.satake_angles(primes)
    nu_max = max(1, int(math.floor(math.log(N, 2) + 1e-9)))
    prime_powers = invert_factors(local_factor_polys(theta, kind), nu_max)
    table = np.ones(N + 1)
    table[0] = 0.0
    fill_multiplicative(table, primes, prime_powers)
    coeffs = DirichletCoefficients(kind, table, N, f.weight)
    per_form[(kind, N)] = coeffs
    logger.info("Built %s coefficients for weight %d through n=%d", kind, f.weight, N)
    return coeffs


def zeta_free_coefficients(f: HeckeEigenform, m: int, N: int) -> np.ndarray:
    """Coefficients of L(s, sym^m f x sym^m f) / zeta(s): local factor (1 - x) / D_p(x)."""
    per_form = _coefficient_cache.setdefault(f, {}).setdefault("zeta_free", {})
    key = (m, N)
    if key in per_form:
        return per_form[key]
    kind = RankinSelberg(m)
    primes = sieve_primes(N)
    f.require(N)
    polys = local_factor_polys(f.satake_angles(primes), kind)
    # multiplying the inverse by (1 - x) drops one zeta factor
    nu_max = max(1, int(math.floor(math.log(N, 2) + 1e-9)))
    inverse = invert_factors(polys, nu_max)
    prime_powers = inverse.copy()
    prime_powers[:, 1:] -= inverse[:, :-1]
    table = np.ones(N + 1)
    table[0] = 0.0
    fill_multiplicative(table, primes, prime_powers)
    per_form[key] = table
    return table


def von_mangoldt_rs(f: HeckeEigenform, m: int, p: int, nu: int) -> VonMangoldtRS:
    """Lambda of sym^m f x sym^m f at p^nu: U_m(cos nu theta)^2 log p."""
    if nu < 1:
        raise InvalidArgumentError(f"nu must be >= 1, got {nu}")
    theta = f.satake_angles(np.array([p]))[0]
    value = float(root_power_sum(theta, RankinSelberg(m), nu)) * math.log(p)
    return VonMangoldtRS(int(p) ** nu, value)


def von_mangoldt_psi(f: HeckeEigenform, m: int, p: int, nu: int) -> float:
    """Lambda_{f,m}(p^nu) = 2 sum_{j=1}^m (m+1-j) cos(2 j theta nu) log p."""
    if nu < 1:
        raise InvalidArgumentError(f"nu must be >= 1, got {nu}")
    theta = f.satake_angles(np.array([p]))[0]
    j = np.arange(1, m + 1)
    return float(2 * np.sum((m + 1 - j) * np.cos(2 * j * theta * nu)) * math.log(p))


def log_deriv_oracle(factor: LocalFactor, nu_max: int) -> List[float]:
    """Lambda(p^nu), nu = 1..nu_max, from -x D'(x)/D(x) using polynomial arithmetic only."""
    if not 1 <= nu_max <= LOG_DERIV_MAX_NU:
        raise InvalidArgumentError(
            f"nu_max must be in 1..{LOG_DERIV_MAX_NU}, got {nu_max}")
    d = factor.poly
    deg = factor.degree
    series = [0.0] * (nu_max + 1)
    for nu in range(1, nu_max + 1):
        acc = -nu * d[nu] if nu <= deg else 0.0
        for j in range(1, min(nu - 1, deg) + 1):
            acc -= d[j] * series[nu - j]
        series[nu] = acc
    log_p = math.log(factor.p)
    return [v * log_p for v in series[1:]]


def _mp_expand(exponents: List[int], theta) -> List:
    alpha = mpmath.expj(theta)
    poly = [mpmath.mpc(1)]
    for e in exponents:
        r = alpha ** e
        poly = [a - r * b for a, b in zip(poly + [0], [0] + poly)]
    return poly


def zeta_factorization_residual(f: HeckeEigenform, p: int, m: int, dps: int = 40) -> float:
    """max coefficient gap in D_p^{RS}(x) = (1 - x)^{m+1} Psi_p(x), in extended precision."""
    theta = f.satake_angles(np.array([p]))[0]
    rs_exponents = root_exponents(RankinSelberg(m)).tolist()
    psi_exponents = []
    for ell in range(m):
        psi_exponents += [2 * (m - ell), -2 * (m - ell)] * (ell + 1)
    with mpmath.workdps(dps):
        theta = mpmath.mpf(float(theta))
        quotient = _mp_expand(rs_exponents, theta)
        remainders = []
        for _ in range(m + 1):
            # synthetic division by (1 - x)
            q = [quotient[0]]
            for c in quotient[1:-1]:
                q.append(c + q[-1])
            remainders.append(quotient[-1] + q[-1])
            quotient = q
        psi = _mp_expand(psi_exponents, theta)
        gaps = [abs(a - b) for a, b in zip(quotient, psi)] + [abs(r) for r in remainders]
        return float(max(gaps))


def divisor_function(z: int, N: int) -> np.ndarray:
    """d_z(n) for n <= N, with d_z(p^nu) = C(z + nu - 1, nu)."""
    if z < 1 or N < 1:
        raise InvalidArgumentError(f"Need z >= 1 and N >= 1, got z={z}, N={N}")
    primes = sieve_primes(N)
    nu_max = max(1, int(math.floor(math.log(N, 2) + 1e-9)))
    row = np.array([math.comb(z + nu - 1, nu) for nu in range(nu_max + 1)], dtype=np.float64)
    table = np.ones(N + 1)
    table[0] = 0.0
    fill_multiplicative(table, primes, np.broadcast_to(row, (len(primes), nu_max + 1)))
    return table


def export_coefficients(coeffs: DirichletCoefficients, path: str) -> str:
    """CSV `n,lambda_F` plus a JSON sidecar describing the form and kind."""
    ensure_directory(os.path.dirname(os.path.abspath(path)))
    df = pd.DataFrame({"n": np.arange(1, coeffs.N + 1), "lambda_F": coeffs.table[1:]})
    df.to_csv(path, index=False, float_format="%.17g")
    meta: Dict = provenance(coeffs.weight, coeffs.kind.label, coeffs.N)
    meta.update({"m": coeffs.kind.m, "variant": coeffs.kind.variant})
    write_json(path + ".json", meta)
    return path


def prime_power_table(f: HeckeEigenform, kind: LKind, primes: np.ndarray,
                      nu_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """(theta, lambda_F(p^nu)) for each prime, nu = 0..nu_max."""
    theta = f.satake_angles(primes)
    return theta, invert_factors(local_factor_polys(theta, kind), nu_max)
