# symuniv/random_model.py
"""
Random Euler products L(s, F; omega) with independent uniform phases
omega_p, and their comparison with vertical shifts of L(s, F).
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats
from tqdm import tqdm

from .errors import InvalidArgumentError, OutOfRegionError
from .kinds import LKind
from .lvalue import EvalParams, smoothed_grid
from .modform import HeckeEigenform
from .prime_stats import sieve_primes
from .sympower import invert_factors, local_factor_polys, root_power_sum

logger = logging.getLogger(__name__)

DEFAULT_P_MAX = 100_000
TAIL_TOL = 1e-14
NU_CAP = 600
MIN_SAMPLES = 100
SAMPLE_BATCH = 128
# asymptotic two-sample Kolmogorov-Smirnov constant at the 1% level, about 1.6276
KS_C_001 = float(stats.kstwobign.ppf(0.99))


@dataclass(frozen=True, eq=False)
class PhaseAssignment:
    """omega_p = exp(i angle) for the primes p <= P_max, keyed by (seed, prime index)."""

    seed: int
    primes: np.ndarray
    angles: np.ndarray

    @property
    def p_max(self) -> int:
        return int(self.primes[-1]) if self.primes.size else 1

    @property
    def phases(self) -> np.ndarray:
        return np.exp(1j * self.angles)

    def omega(self, n: int) -> complex:
        """Completely multiplicative extension omega_n = prod omega_p^nu."""
        angle = 0.0
        for i, p in enumerate(self.primes):
            p = int(p)
            if p > n:
                break
            while n % p == 0:
                angle += self.angles[i]
                n //= p
        if n != 1:
            raise InvalidArgumentError(f"n has a prime factor above P_max={self.p_max}")
        return complex(math.cos(angle), math.sin(angle))


def _phase_angles(seed: int, n_primes: int) -> np.ndarray:
    # Philox is counter based: index i always receives the same draw
    generator = np.random.Generator(np.random.Philox(key=int(seed)))
    return generator.random(n_primes) * (2 * math.pi)


def sample_phases(seed: int, P_max: int = DEFAULT_P_MAX) -> PhaseAssignment:
    if P_max < 2:
        raise InvalidArgumentError(f"P_max must be >= 2, got {P_max}")
    primes = sieve_primes(P_max)
    return PhaseAssignment(int(seed), primes, _phase_angles(seed, primes.size))


@dataclass
class ModelSample:
    value: complex
    log_value: complex
    p_max: int
    seed: Optional[int] = None


def truncation_orders(primes: np.ndarray, sigma: float, z: int) -> np.ndarray:
    """First nu per prime whose dropped tail, bounded by d_z(p^j) p^{-j sigma}, is below 1e-14."""
    p_sigma = primes.astype(np.float64) ** (-sigma)
    orders = np.full(primes.size, NU_CAP)
    done = np.zeros(primes.size, dtype=bool)
    for nu in range(1, NU_CAP + 1):
        term = float(math.comb(z + nu, nu + 1)) * p_sigma ** (nu + 1)
        ratio = (z + nu + 1) / (nu + 2) * p_sigma
        with np.errstate(divide="ignore"):
            tail = np.where(ratio < 1, term / np.maximum(1 - ratio, 1e-300), np.inf)
        newly = ~done & (tail < TAIL_TOL)
        orders[newly] = nu
        done |= newly
        if done.all():
            break
    if not done.all():
        logger.warning("Local series truncated at nu=%d with tail above %g", NU_CAP, TAIL_TOL)
    return orders


class _LocalTables:
    """Per-prime coefficients lambda_F(p^nu) p^{-nu s}, grouped by truncation order."""

    def __init__(self, f: HeckeEigenform, kind: LKind, s: complex, P_max: int):
        self.primes = sieve_primes(P_max)
        f.require(int(self.primes[-1]))
        theta = f.satake_angles(self.primes)
        orders = truncation_orders(self.primes, s.real, kind.divisor_order)
        polys = local_factor_polys(theta, kind)
        log_p = np.log(self.primes.astype(np.float64))
        self.groups: List[Tuple[np.ndarray, np.ndarray]] = []
        for order in np.unique(orders):
            idx = np.flatnonzero(orders == order)
            lam = invert_factors(polys[idx], int(order))
            y = np.exp(-s * log_p[idx])
            powers = y[:, None] ** np.arange(int(order) + 1)[None, :]
            self.groups.append((idx, lam * powers))

    def log_values(self, angles: np.ndarray) -> np.ndarray:
        """sum_p Log(local series at omega_p) for each row of phase angles."""
        angles = np.atleast_2d(angles)
        total = np.zeros(angles.shape[0], dtype=np.complex128)
        for idx, coef in self.groups:
            z = np.exp(1j * angles[:, idx])
            acc = np.broadcast_to(coef[:, -1], z.shape).astype(np.complex128)
            for nu in range(coef.shape[1] - 2, -1, -1):
                acc = acc * z + coef[:, nu]
            total += np.log(acc).sum(axis=1)
        return total


def _check_model_region(s: complex) -> None:
    if s.real <= 0.5:
        raise OutOfRegionError(f"Random Euler products need Re(s) > 1/2, got {s.real}")


def random_L(f: HeckeEigenform, kind: LKind, s: complex, omega: PhaseAssignment) -> ModelSample:
    """prod_{p <= P_max} sum_{nu <= nu_max(p)} omega_p^nu lambda_F(p^nu) p^{-nu s}."""
    s = complex(s)
    _check_model_region(s)
    tables = _LocalTables(f, kind, s, omega.p_max)
    log_value = complex(tables.log_values(omega.angles)[0])
    return ModelSample(complex(np.exp(log_value)), log_value, omega.p_max, omega.seed)


def random_L_batch(
    f: HeckeEigenform,
    kind: LKind,
    s: complex,
    seeds: Sequence[int],
    P_max: int = DEFAULT_P_MAX,
    n_jobs: int = 1,
    show_progress: bool = False
) -> np.ndarray:
    """Log values for one sample per seed; the result order follows `seeds`."""
    s = complex(s)
    _check_model_region(s)
    tables = _LocalTables(f, kind, s, P_max)
    n_primes = tables.primes.size
    seeds = list(seeds)
    batches = [seeds[i:i + SAMPLE_BATCH] for i in range(0, len(seeds), SAMPLE_BATCH)]

    def evaluate(batch):
        angles = np.stack([_phase_angles(seed, n_primes) for seed in batch])
        return tables.log_values(angles)

    if n_jobs == 1:
        parts = [evaluate(b) for b in tqdm(batches, disable=not show_progress)]
    else:
        parts = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(evaluate)(b) for b in tqdm(batches, disable=not show_progress))
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.complex128)


def _first_order_terms(f: HeckeEigenform, kind: LKind, s: complex, omega: PhaseAssignment):
    lam = root_power_sum(f.satake_angles(omega.primes), kind, 1)
    return lam * np.exp(-s * np.log(omega.primes.astype(np.float64)))


def dagger_series(f: HeckeEigenform, kind: LKind, s: complex, omega: PhaseAssignment) -> complex:
    """-sum_p log(1 - omega_p lambda_F(p) p^{-s})."""
    s = complex(s)
    _check_model_region(s)
    terms = _first_order_terms(f, kind, s, omega)
    return complex(-np.sum(np.log(1 - omega.phases * terms)))


def flat_series(
    f: HeckeEigenform,
    kind: LKind,
    s: complex,
    omega: PhaseAssignment,
    p0: int = 3
) -> complex:
    """-sum_{p > p0} omega_p log(1 - lambda_F(p) p^{-s})."""
    s = complex(s)
    _check_model_region(s)
    if p0 < 3:
        raise InvalidArgumentError(f"p0 must be >= 3, got {p0}")
    terms = _first_order_terms(f, kind, s, omega)
    keep = omega.primes > p0
    return complex(-np.sum(omega.phases[keep] * np.log(1 - terms[keep])))


def model_moments_reference(
    f: HeckeEigenform,
    kind: LKind,
    s: complex,
    P_max: int = DEFAULT_P_MAX
) -> Dict[str, float]:
    """E L = 1 and E|L|^2 = prod_p sum_nu |lambda_F(p^nu)|^2 p^{-2 nu sigma}."""
    s = complex(s)
    _check_model_region(s)
    tables = _LocalTables(f, kind, complex(s.real, 0.0), P_max)
    log_second = sum(float(np.sum(np.log(np.sum(np.abs(coef) ** 2, axis=1))))
                     for _, coef in tables.groups)
    return {"mean": 1.0, "second_moment": math.exp(log_second)}


def monte_carlo_moments(
    f: HeckeEigenform,
    kind: LKind,
    s: complex,
    n: int,
    seed: int = 0,
    P_max: int = DEFAULT_P_MAX,
    n_jobs: int = 1
) -> Dict:
    """Sample mean and second moment with standard errors, next to the exact reference."""
    if n < MIN_SAMPLES:
        raise InvalidArgumentError(f"Need at least {MIN_SAMPLES} samples, got {n}")
    values = np.exp(random_L_batch(f, kind, s, range(seed, seed + n), P_max, n_jobs))
    reference = model_moments_reference(f, kind, s, P_max)
    mean = complex(values.mean())
    mean_se = float(np.sqrt(np.mean(np.abs(values - mean) ** 2) / n))
    squares = np.abs(values) ** 2
    second = float(squares.mean())
    second_se = float(squares.std(ddof=1) / math.sqrt(n))
    return {
        "n": n,
        "mean": mean,
        "mean_se": mean_se,
        "mean_z": abs(mean - reference["mean"]) / mean_se,
        "second_moment": second,
        "second_moment_se": second_se,
        "second_moment_ref": reference["second_moment"],
        "second_moment_z": abs(second - reference["second_moment"]) / second_se,
        "min_abs": float(np.abs(values).min()),
    }


def _moments(values: np.ndarray) -> Dict:
    return {"mean": complex(values.mean()), "second_moment": float(np.mean(np.abs(values) ** 2))}


def ks_critical_value(n1: int, n2: int, c: float = KS_C_001) -> float:
    return c * math.sqrt((n1 + n2) / (n1 * n2))


def compare_samples(a: np.ndarray, b: np.ndarray) -> Dict[str, float]:
    """Two-sample KS statistics on Re log L, principal Im log L and |L|."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    return {
        "ks_re": float(stats.ks_2samp(np.log(np.abs(a)), np.log(np.abs(b))).statistic),
        "ks_im": float(stats.ks_2samp(np.angle(a), np.angle(b)).statistic),
        "ks_abs": float(stats.ks_2samp(np.abs(a), np.abs(b)).statistic),
    }


def distribution_compare(
    f: HeckeEigenform,
    kind: LKind,
    s: complex,
    T: float,
    n_shift: int,
    n_model: int,
    seed: int = 0,
    P_max: int = DEFAULT_P_MAX,
    X: Optional[float] = None,
    n_jobs: int = 1,
    show_progress: bool = False
) -> Tuple[Dict, pd.DataFrame]:
    """Vertical shifts L(s + it), t uniform on [0, T], against random-model samples."""
    s = complex(s)
    if s.real <= kind.sigma_F:
        raise OutOfRegionError(f"Re(s) = {s.real} is not above sigma_F = {kind.sigma_F} for {kind}")
    if n_shift < MIN_SAMPLES or n_model < MIN_SAMPLES:
        raise InvalidArgumentError(
            f"Need at least {MIN_SAMPLES} samples on each side, got {n_shift} and {n_model}")
    generator = np.random.Generator(np.random.Philox(key=int(seed)))
    ts = generator.uniform(0.0, T, n_shift)
    X = X if X is not None else EvalParams.for_height(abs(s.imag) + T)
    shift_values = smoothed_grid(f, kind, [s], ts, X, n_jobs=n_jobs,
                                 show_progress=show_progress)[0]
    # seed itself drives the shift draws; model samples use the next n_model keys
    model_values = np.exp(random_L_batch(f, kind, s, range(seed + 1, seed + 1 + n_model),
                                         P_max, n_jobs, show_progress))
    report = {
        "s": s,
        "T": T,
        "n_shift": n_shift,
        "n_model": n_model,
        "p_max": P_max,
        "seed": seed,
        "X": X,
        "projection": "values at a single fixed s",
        "moments_shift": _moments(shift_values),
        "moments_model": _moments(model_values),
        "ks_critical_001": ks_critical_value(n_shift, n_model),
    }
    report.update(compare_samples(shift_values, model_values))
    samples = pd.DataFrame({
        "population": ["shift"] * n_shift + ["model"] * n_model,
        "parameter": np.concatenate([ts, np.arange(seed + 1, seed + 1 + n_model)]),
        "re": np.concatenate([shift_values.real, model_values.real]),
        "im": np.concatenate([shift_values.imag, model_values.imag]),
    })
    return report, samples


def support_check(
    f: HeckeEigenform,
    kind: LKind,
    n: int,
    sigmas: Sequence[float] = (0.75, 0.8, 0.85, 0.9, 0.95),
    ts: Sequence[float] = (0.0, 0.5, 1.0, 1.5, 2.0),
    seed: int = 0,
    P_max: int = DEFAULT_P_MAX,
    n_jobs: int = 1
) -> Dict:
    """min |L(s, F; omega)| over n samples and the grid sigmas x ts."""
    minima = []
    for sigma in sigmas:
        for t in ts:
            logs = random_L_batch(f, kind, complex(sigma, t), range(seed, seed + n), P_max, n_jobs)
            minima.append(float(np.exp(logs.real.min())))
    return {
        "n_samples": n,
        "grid_points": len(minima),
        "min_abs": min(minima),
        "all_nonzero": bool(min(minima) > 0),
    }


def tail_stability(
    f: HeckeEigenform,
    kind: LKind,
    s: complex,
    seed: int,
    P_small: int,
    P_max: int = DEFAULT_P_MAX
) -> float:
    """|L_{P_max} - L_{P_small}| for one fixed-seed sample; phases agree on the common primes."""
    if not 2 <= P_small < P_max:
        raise InvalidArgumentError(f"Need 2 <= P_small < P_max, got {P_small}, {P_max}")
    small = random_L(f, kind, s, sample_phases(seed, P_small))
    full = random_L(f, kind, s, sample_phases(seed, P_max))
    return abs(full.value - small.value)
