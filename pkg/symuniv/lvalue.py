# symuniv/lvalue.py
"""
Numerical values of L(s, F) for F = sym^m f or sym^m f x sym^m f.

Two evaluation modes are offered. The smoothed mode sums
lambda_F(n) n^{-s} W(n/X) with W(x) = Q(K+1, x^2) = e^{-x^2} sum_{j<=K} x^{2j}/j!,
the regularized upper incomplete gamma function. Its Mellin transform
Gamma(w/2 + K + 1) / (K! w) has residue 1 at w = 0 and no further pole
before w = -2(K+1), so the sum equals L(s, F) up to
L(s - 2K - 2, F) X^{-2K-2} / (K+1)! wherever L is holomorphic; K = 0 is
the Gaussian exp(-(n/X)^2). For the Rankin-Selberg
square the pole at s = 1 contributes r Gamma((1-s)/2 + K + 1) / (K! (1-s)) X^{1-s},
which is subtracted. The Euler-product mode is only valid for Re(s) > 1.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from joblib import Parallel, delayed
from scipy import special
from tqdm import tqdm

from .errors import (InsufficientCacheError, InvalidArgumentError,
                     OutOfRegionError, UnsupportedKindError)
from .kinds import LKind, Sym
from .modform import HeckeEigenform
from .prime_stats import sieve_primes
from .sympower import (dirichlet_coefficients, local_factor_polys,
                       zeta_free_coefficients)

logger = logging.getLogger(__name__)

SMOOTHED = "smoothed"
EULER_PRODUCT = "euler_product"
MODES = [SMOOTHED, EULER_PRODUCT]

MIN_X = 50.0
TERMS_PER_X = 10
# K in W(x) = Q(K+1, x^2); the first uncancelled error term is X^{-2K-2}
SMOOTHING_ORDER = 4
# W(n/X) < 1e-33 beyond n = sqrt(92) X
TAIL_FACTOR = math.sqrt(92.0)
DEFAULT_EULER_P = 100_000
# complex entries per n^{-it} block
_BLOCK_ELEMENTS = 1 << 22

FE_TEST_POINTS = (complex(0.3, 2.0), complex(0.75, 0.0), complex(0.6, 5.0))
DEFAULT_SPLIT = 1.25


def sigma_strip(kind: LKind) -> float:
    """sigma_F = 1 - 1/(m+1) for sym^m, 1 - 1/(m+1)^2 for the Rankin-Selberg square."""
    return kind.sigma_F


@dataclass(frozen=True)
class GammaFactorSpec:
    """Gamma_R(s + mu) and Gamma_C(s + mu) factors, repeated by multiplicity."""

    factors: Tuple[Tuple[str, float], ...]

    @property
    def degree(self) -> int:
        return sum(2 if kind == "C" else 1 for kind, _ in self.factors)

    def to_list(self) -> List[List]:
        return [[kind, shift] for kind, shift in self.factors]


def gamma_spec(kind: LKind, k: int) -> GammaFactorSpec:
    m = kind.m
    n, odd = divmod(m, 2)
    factors: List[Tuple[str, float]] = []
    if kind.is_rankin_selberg:
        if odd:
            factors += [("C", 0.0)] * (n + 1)
        else:
            factors += [("R", 0.0)] + [("C", 0.0)] * n
        for nu in range(1, m + 1):
            factors += [("C", float(nu * (k - 1)))] * (m - nu + 1)
    elif odd:
        factors += [("C", (nu + 0.5) * (k - 1)) for nu in range(n + 1)]
    else:
        factors += [("R", float(n % 2))]
        factors += [("C", float(nu * (k - 1))) for nu in range(1, n + 1)]
    return GammaFactorSpec(tuple(factors))


def log_gamma_factor(spec: GammaFactorSpec, s) -> np.ndarray:
    """log L_infinity(s, F), elementwise on complex arrays."""
    s = np.asarray(s, dtype=np.complex128)
    total = np.zeros_like(s)
    for kind, shift in spec.factors:
        z = s + shift
        if kind == "R":
            total = total - z / 2 * math.log(math.pi) + special.loggamma(z / 2)
        else:
            total = total + math.log(2.0) - z * math.log(2 * math.pi) + special.loggamma(z)
    return total


def gamma_factor(spec: GammaFactorSpec, s) -> np.ndarray:
    return np.exp(log_gamma_factor(spec, s))


@dataclass
class EvalParams:
    """Smoothing length X, truncation N_terms, Euler cutoff P and the mode."""

    X: Optional[float] = None
    N_terms: Optional[int] = None
    mode: str = SMOOTHED
    P: Optional[int] = None

    @staticmethod
    def for_height(t: float) -> float:
        return max(MIN_X, 3.0 * abs(t))

    def resolved(self, t: float = 0.0) -> "EvalParams":
        if self.mode not in MODES:
            raise InvalidArgumentError(f"Mode must be one of {MODES}, got {self.mode!r}")
        X = float(self.X) if self.X is not None else self.for_height(t)
        if X <= 0:
            raise InvalidArgumentError(f"Smoothing length X must be positive, got {X}")
        N_terms = self.N_terms if self.N_terms is not None else int(math.ceil(TERMS_PER_X * X))
        if N_terms < math.ceil(TAIL_FACTOR * X):
            raise InvalidArgumentError(
                f"N_terms={N_terms} must be at least ceil(sqrt(92) X) = {math.ceil(TAIL_FACTOR * X)}")
        return replace(self, X=X, N_terms=N_terms)


@dataclass
class LValue:
    value: complex
    stability: float
    mode: str
    params: EvalParams
    flagged: bool = False

    def to_dict(self) -> Dict:
        return {
            "value": self.value,
            "stability": self.stability,
            "mode": self.mode,
            "X": self.params.X,
            "N_terms": self.params.N_terms,
            "P": self.params.P,
            "flagged": self.flagged,
        }


def _check_region(kind: LKind, points: np.ndarray, mode: str) -> None:
    bound = 1.0 if mode == EULER_PRODUCT else kind.sigma_F
    worst = float(points.real.min())
    if worst <= bound:
        raise OutOfRegionError(
            f"Re(s) = {worst:.6g} is not above {bound:.6g} required by {mode} mode for {kind}")
    if kind.is_rankin_selberg and np.any(np.abs(points - 1.0) < 1e-12):
        raise OutOfRegionError(f"{kind} has a pole at s = 1")


def smoothing_weight(n: np.ndarray, X: float) -> np.ndarray:
    """W(n/X) = Q(K+1, (n/X)^2) with K = SMOOTHING_ORDER."""
    return special.gammaincc(SMOOTHING_ORDER + 1, (np.asarray(n, dtype=np.float64) / X) ** 2)


def _pole_residue(f: HeckeEigenform, kind: LKind, X: float, N: int) -> float:
    """Smoothed value at s = 1 of L(s, F) / zeta(s)."""
    b = zeta_free_coefficients(f, kind.m, N)[1:]
    n = np.arange(1, N + 1, dtype=np.float64)
    return float(np.sum(b / n * smoothing_weight(n, X)))


def _pole_term(residue: float, s: np.ndarray, X: float) -> np.ndarray:
    w = 1 - s
    log_kernel = (special.loggamma(w / 2 + SMOOTHING_ORDER + 1)
                  - math.lgamma(SMOOTHING_ORDER + 1) + w * math.log(X))
    return residue * np.exp(log_kernel) / w


def smoothed_grid(
    f: HeckeEigenform,
    kind: LKind,
    base_points: Sequence[complex],
    ts: Sequence[float],
    X: float,
    N_terms: Optional[int] = None,
    n_jobs: int = 1,
    show_progress: bool = False
) -> np.ndarray:
    """
    Smoothed values at every z + i t, shape (len(base_points), len(ts)).

    Uses one X for the whole grid so the approximant is a single analytic
    function of s. Blocks of t run on a joblib thread pool; the order of
    the result does not depend on the schedule.
    """
    base = np.atleast_1d(np.asarray(base_points, dtype=np.complex128))
    ts = np.atleast_1d(np.asarray(ts, dtype=np.float64))
    params = EvalParams(X=X, N_terms=N_terms).resolved()
    X, N = params.X, params.N_terms
    shifted = base[:, None] + 1j * ts[None, :]
    _check_region(kind, shifted, SMOOTHED)
    coeffs = dirichlet_coefficients(f, kind, N).table[1:]
    n = np.arange(1, N + 1, dtype=np.float64)
    log_n = np.log(n)
    weighted = coeffs * smoothing_weight(n, X)
    matrix = weighted[None, :] * np.exp(-np.outer(base, log_n))

    rows = max(1, _BLOCK_ELEMENTS // N)
    blocks = [ts[i:i + rows] for i in range(0, len(ts), rows)]

    def evaluate(block):
        return matrix @ np.exp(-1j * np.outer(log_n, block))

    if n_jobs == 1 or len(blocks) == 1:
        parts = [evaluate(b) for b in tqdm(blocks, disable=not show_progress)]
    else:
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(evaluate)(b) for b in tqdm(blocks, disable=not show_progress))
    values = np.concatenate(parts, axis=1)
    if kind.is_rankin_selberg:
        values = values - _pole_term(_pole_residue(f, kind, X, N), shifted, X)
    return values


def _euler_log_terms(f: HeckeEigenform, kind: LKind, s: complex, P: int) -> np.ndarray:
    primes = sieve_primes(P)
    polys = local_factor_polys(f.satake_angles(primes), kind)
    y = np.exp(-s * np.log(primes.astype(np.float64)))
    acc = polys[:, -1].astype(np.complex128)
    for j in range(polys.shape[1] - 2, -1, -1):
        acc = acc * y + polys[:, j]
    return -np.log(acc)


def eval_L(
    f: HeckeEigenform,
    kind: LKind,
    s: complex,
    params: Optional[EvalParams] = None,
    tolerance: Optional[float] = None,
    estimate_stability: bool = True
) -> LValue:
    """
    L(s, F) in the smoothed or Euler-product mode with a stability estimate.

    The estimate is |value(X) - value(2X)| in smoothed mode and
    |value(P) - value(2P)| in Euler-product mode. It is NaN when the
    coefficient data cannot support the comparison. A value whose estimate
    exceeds `tolerance` is flagged, not rejected. Without an explicit P the
    Euler product runs to min(N/2, DEFAULT_EULER_P) so that 2P is covered.
    """
    s = complex(s)
    params = (params or EvalParams()).resolved(s.imag)
    _check_region(kind, np.array([s]), params.mode)
    stability = float("nan")
    if params.mode == SMOOTHED:
        value = complex(smoothed_grid(f, kind, [s], [0.0], params.X, params.N_terms)[0, 0])
        if estimate_stability:
            if f.N >= 2 * params.N_terms:
                wider = smoothed_grid(f, kind, [s], [0.0], 2 * params.X, 2 * params.N_terms)
                stability = abs(value - complex(wider[0, 0]))
            else:
                logger.info("Coefficients stop at n=%d; no stability estimate at 2X", f.N)
    else:
        P = params.P if params.P is not None else max(2, min(f.N // 2, DEFAULT_EULER_P))
        if P > f.N:
            raise InsufficientCacheError(f"Euler product to P={P} needs coefficients to {P}")
        params = replace(params, P=P)
        wide = estimate_stability and 2 * P <= f.N
        logs = _euler_log_terms(f, kind, s, 2 * P if wide else P)
        count = int(np.searchsorted(sieve_primes(2 * P if wide else P), P, side="right"))
        value = complex(np.exp(logs[:count].sum()))
        if wide:
            stability = abs(value - complex(np.exp(logs.sum())))
        elif estimate_stability:
            logger.info("Coefficients stop at n=%d; no stability estimate at 2P", f.N)
    flagged = tolerance is not None and not stability <= tolerance
    if flagged:
        logger.warning("L(%s, %s) stability %.3g exceeds tolerance %.3g", s, kind, stability, tolerance)
    return LValue(value, stability, params.mode, params, flagged)


def completed_lambda_m1(
    f: HeckeEigenform,
    s: complex,
    epsilon: int = 1,
    split: float = DEFAULT_SPLIT,
    n_terms: int = 60,
    dps: int = 30
) -> complex:
    """
    Lambda(s, f) = Gamma_C(s + (k-1)/2) L(s, f) by the split theta integral.

    With F(y) = sum c(n) e^{-2 pi n y}, Lambda(s) = 2 int_0^inf F(y) y^{s+kappa-1} dy;
    splitting at y = split and applying F(1/y) = epsilon y^k F(y) gives two
    rapidly convergent incomplete-gamma series.
    """
    kappa = (f.weight - 1) / 2.0
    n_terms = min(n_terms, f.N)
    with mpmath.workdps(dps):
        s = mpmath.mpc(s)
        total = mpmath.mpc(0)
        for n in range(1, n_terms + 1):
            c = f.c(n)
            if c == 0:
                continue
            x = 2 * mpmath.pi * n
            a = s + kappa
            b = 1 - s + kappa
            total += c * (x ** (-a) * mpmath.gammainc(a, x * split)
                          + epsilon * x ** (-b) * mpmath.gammainc(b, x / split))
        return complex(2 * total)


@dataclass
class FunctionalEquationData:
    epsilon: int
    residual: float
    residuals: Dict[int, float] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {"epsilon": self.epsilon, "residual": self.residual,
                "residuals": {str(k): v for k, v in self.residuals.items()}}


def functional_equation_check(
    f: HeckeEigenform,
    kind: Optional[LKind] = None,
    points: Sequence[complex] = FE_TEST_POINTS,
    split: float = DEFAULT_SPLIT
) -> FunctionalEquationData:
    """Pick the sign in {+1, -1} minimizing max |Lambda(s) - eps Lambda(1-s)|."""
    if kind is not None and kind != Sym(1):
        raise UnsupportedKindError(
            f"The completed Lambda route is implemented for sym1 only, got {kind}")
    residuals = {}
    for eps in (1, -1):
        residuals[eps] = max(
            abs(completed_lambda_m1(f, s, eps, split)
                - eps * completed_lambda_m1(f, 1 - s, eps, split))
            for s in points)
    best = min(residuals, key=residuals.get)
    return FunctionalEquationData(best, residuals[best], residuals)


def mean_square(
    f: HeckeEigenform,
    kind: LKind,
    sigma: float,
    T: float,
    dt: float = 0.1,
    X: Optional[float] = None,
    N_terms: Optional[int] = None,
    n_jobs: int = 1,
    show_progress: bool = False
) -> Dict:
    """Riemann-sum mean of |L(sigma + it)|^2 on [0, T] against the diagonal sum."""
    if sigma <= kind.sigma_F:
        raise OutOfRegionError(f"sigma = {sigma} is not above sigma_F = {kind.sigma_F} for {kind}")
    if T < 100:
        raise InvalidArgumentError(f"T must be at least 100, got {T}")
    if dt <= 0:
        raise InvalidArgumentError(f"Grid step must be positive, got {dt}")
    params = EvalParams(X=X, N_terms=N_terms).resolved(T)
    ts = np.arange(0.0, T, dt)
    values = smoothed_grid(f, kind, [complex(sigma, 0.0)], ts, params.X, params.N_terms,
                           n_jobs=n_jobs, show_progress=show_progress)[0]
    m_emp = float(dt / T * np.sum(np.abs(values) ** 2))
    coeffs = dirichlet_coefficients(f, kind, params.N_terms).table[1:]
    n = np.arange(1, params.N_terms + 1, dtype=np.float64)
    m_ref = float(np.sum(coeffs ** 2 * n ** (-2 * sigma) * smoothing_weight(n, params.X) ** 2))
    report = {
        "kind": kind.label,
        "sigma": sigma,
        "T": T,
        "dt": dt,
        "X": params.X,
        "N_terms": params.N_terms,
        "M_emp": m_emp,
        "M_ref": m_ref,
        "ratio": m_emp / m_ref,
        "growth_exponent": (1 - sigma) / (1 - kind.sigma_F) if sigma < 1 else 0.0,
    }
    logger.info("Mean square %s at sigma=%g: ratio %.6f", kind, sigma, report["ratio"])
    return report


def convexity_exponent(kind: LKind) -> float:
    m = kind.m
    if kind.is_rankin_selberg:
        return (m + 1) ** 2 / 4.0
    return (m + 1 + (m % 2)) / 4.0


def growth_diagnostic(
    f: HeckeEigenform,
    kind: LKind,
    sigma: float,
    t_samples: Sequence[float],
    X: Optional[float] = None
) -> Dict:
    """Least-squares slope of log|L(sigma + it)| against log t."""
    t = np.asarray(t_samples, dtype=np.float64)
    if t.size < 8:
        raise InvalidArgumentError(f"Need at least 8 samples, got {t.size}")
    if np.any(np.diff(t) <= 0) or t[0] <= 0:
        raise InvalidArgumentError("t samples must be positive and strictly increasing")
    params = EvalParams(X=X).resolved(float(t[-1]))
    values = smoothed_grid(f, kind, [complex(sigma, 0.0)], t, params.X, params.N_terms)[0]
    slope, intercept = np.polyfit(np.log(t), np.log(np.abs(values)), 1)
    return {
        "kind": kind.label,
        "sigma": sigma,
        "n_samples": int(t.size),
        "fitted_exponent": float(slope),
        "intercept": float(intercept),
        "convexity_exponent": convexity_exponent(kind),
    }
