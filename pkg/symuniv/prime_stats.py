# symuniv/prime_stats.py
import logging
import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Dict, Optional, Sequence

import numpy as np
import pandas as pd

from .errors import InvalidArgumentError
from .modform import HeckeEigenform, chebyshev_u

logger = logging.getLogger(__name__)

DEFAULT_SIEVE_LIMIT = 10 ** 6
MAX_SIEVE_LIMIT = 10 ** 7
DEFAULT_ETA = 0.1


@lru_cache(maxsize=8)
def sieve_primes(limit: int) -> np.ndarray:
    """All primes <= limit, from an odd-only sieve of Eratosthenes (read-only array)."""
    limit = int(limit)
    if limit < 2:
        primes = np.zeros(0, dtype=np.int64)
    else:
        # index i stands for 2i + 1
        odd = np.ones((limit + 1) // 2, dtype=bool)
        odd[0] = False
        for i in range(1, (math.isqrt(limit) - 1) // 2 + 1):
            if odd[i]:
                p = 2 * i + 1
                odd[p * p // 2::p] = False
        primes = np.concatenate([[2], 2 * np.flatnonzero(odd) + 1]).astype(np.int64)
    primes.flags.writeable = False
    return primes


@dataclass(frozen=True, eq=False)
class PrimeTable:
    limit: int
    primes: np.ndarray

    @classmethod
    def build(cls, limit: int = DEFAULT_SIEVE_LIMIT) -> "PrimeTable":
        if limit > MAX_SIEVE_LIMIT:
            raise InvalidArgumentError(
                f"Sieve limit {limit} exceeds the supported maximum {MAX_SIEVE_LIMIT}")
        return cls(limit, sieve_primes(limit))

    def pi(self, x: float) -> int:
        if x > self.limit:
            raise InvalidArgumentError(f"pi({x}) requested beyond sieve limit {self.limit}")
        return int(np.searchsorted(self.primes, x, side="right"))

    def up_to(self, x: float) -> np.ndarray:
        return self.primes[:self.pi(x)]


@dataclass
class PntReport:
    m: int
    x: int
    psi: float
    theta: float
    pi_w: float
    psi_ratio: float
    theta_ratio: float
    pi_w_ratio: float
    r_bound: float

    def to_dict(self) -> Dict:
        return asdict(self)


def _rs_weight(theta: np.ndarray, m: int, nu: int = 1) -> np.ndarray:
    """|lambda_f(p^m)|^2 at nu = 1; in general U_m(cos nu theta)^2."""
    u = chebyshev_u(m, np.cos(nu * theta))
    return u * u


def _check_m(m: int) -> None:
    if not 1 <= m <= 4:
        raise InvalidArgumentError(f"m must be in 1..4, got {m}")


def prime_sums(f: HeckeEigenform, m: int, x: int) -> PntReport:
    """psi, theta and pi_w of the Rankin-Selberg square up to x, in one pass over primes."""
    _check_m(m)
    if x < 2:
        raise InvalidArgumentError(f"x must be >= 2, got {x}")
    primes = sieve_primes(x)
    theta_p = f.satake_angles(primes)
    log_p = np.log(primes.astype(np.float64))
    weight = _rs_weight(theta_p, m)
    theta_sum = float(np.sum(weight * log_p))
    psi = theta_sum
    # prime powers p^nu <= x, nu <= log2 x
    nu = 2
    small = primes[primes * primes <= x]
    while small.size:
        k = small.size
        psi += float(np.sum(_rs_weight(theta_p[:k], m, nu) * log_p[:k]))
        nu += 1
        small = small[small.astype(np.float64) ** nu <= x]
    pi_w = float(np.sum(weight))
    log_x = math.log(x)
    n_sqrt = int(np.searchsorted(primes, math.isqrt(x), side="right"))
    report = PntReport(
        m=m,
        x=int(x),
        psi=psi,
        theta=theta_sum,
        pi_w=pi_w,
        psi_ratio=psi / x,
        theta_ratio=theta_sum / x,
        pi_w_ratio=pi_w / (x / log_x),
        r_bound=(m + 1) ** 2 * n_sqrt * log_x,
    )
    if report.psi - report.theta > report.r_bound:
        logger.warning("psi - theta = %.6g exceeds the prime-power bound %.6g",
                       report.psi - report.theta, report.r_bound)
    return report


def pi_delta(
    f: HeckeEigenform,
    m: int,
    delta: float,
    x: int,
    a: Optional[int] = None,
    b: Optional[int] = None,
    eta: float = DEFAULT_ETA
) -> Dict:
    """
    Count primes with |lambda_f(p^m)| >= delta and compare densities on a window.

    Args:
        f: Hecke eigenform
        m: Symmetric power, 1..4
        delta: Threshold in [0, 1)
        x: Cutoff for the total count
        a: Window start; the window (a, b] is reported only when given
        b: Window end (default 2a)
        eta: Offset of the reciprocal-sum comparison window (a(1+eta), b]

    Returns:
        Dictionary with the count and, when a window is given, the empirical
        ratio, the lower bound (1 - delta^2) / ((m+1)^2 - delta^2) and the
        reciprocal-sum ratio.
    """
    _check_m(m)
    if not 0 <= delta < 1:
        raise InvalidArgumentError(f"delta must lie in [0, 1), got {delta}")
    top = max(x, b if b is not None else (2 * a if a is not None else 0))
    primes = sieve_primes(top)
    lam = np.abs(_magnitude(f, m, primes))
    hit = lam >= delta
    n_x = int(np.searchsorted(primes, x, side="right"))
    report = {"m": m, "delta": delta, "x": int(x), "count": int(hit[:n_x].sum()), "pi_x": n_x}
    if a is None:
        return report
    if b is None:
        b = 2 * a
    if not 0 < a < b:
        raise InvalidArgumentError(f"Window must satisfy 0 < a < b, got ({a}, {b}]")
    window = (primes > a) & (primes <= b)
    n_window = int(window.sum())
    inv_p = 1.0 / primes.astype(np.float64)
    reference = (primes > a * (1 + eta)) & (primes <= b)
    report.update({
        "a": int(a),
        "b": int(b),
        "eta": eta,
        "window_count": int((hit & window).sum()),
        "window_primes": n_window,
        "ratio": float((hit & window).sum() / n_window) if n_window else float("nan"),
        "lower_bound": (1 - delta ** 2) / ((m + 1) ** 2 - delta ** 2),
        "reciprocal_ratio": float(inv_p[hit & window].sum() / inv_p[reference].sum())
        if reference.any() else float("nan"),
    })
    return report


def _magnitude(f: HeckeEigenform, m: int, primes: np.ndarray) -> np.ndarray:
    if primes.size == 0:
        return np.zeros(0)
    return chebyshev_u(m, np.cos(f.satake_angles(primes)))


def theta_curve(f: HeckeEigenform, m: int, xs: Sequence[int]) -> pd.DataFrame:
    """theta(x)/x at each x, sharing one cumulative sum."""
    _check_m(m)
    xs = np.asarray(sorted(int(x) for x in xs), dtype=np.int64)
    if xs.size == 0 or xs[0] < 2:
        raise InvalidArgumentError("theta_curve needs cutoffs x >= 2")
    primes = sieve_primes(int(xs[-1]))
    cumulative = np.cumsum(_rs_weight(f.satake_angles(primes), m)
                           * np.log(primes.astype(np.float64)))
    idx = np.searchsorted(primes, xs, side="right") - 1
    theta = cumulative[idx]
    return pd.DataFrame({"x": xs, "theta": theta, "theta_ratio": theta / xs})


def geometric_cutoffs(x_max: int, per_decade: int = 10, x_min: int = 100) -> np.ndarray:
    decades = math.log10(x_max / x_min)
    points = np.logspace(math.log10(x_min), math.log10(x_max),
                         int(round(decades * per_decade)) + 1)
    return np.unique(np.rint(points).astype(np.int64))


def trig_positivity_sum(f: HeckeEigenform, m: int, tau0: float, sigma: float, x: int) -> float:
    """sum_{n<=x} Lambda_RS(n) / (n^sigma log n) * (1 + 2 cos(tau0 log n))^2; never negative."""
    _check_m(m)
    if sigma <= 1:
        raise InvalidArgumentError(f"sigma must exceed 1, got {sigma}")
    primes = sieve_primes(x)
    if primes.size == 0:
        return 0.0
    theta_p = f.satake_angles(primes)
    log_p = np.log(primes.astype(np.float64))
    total = 0.0
    nu = 1
    k = primes.size
    while k:
        log_n = nu * log_p[:k]
        # Lambda(p^nu) / log(p^nu) = U_m(cos nu theta)^2 / nu
        terms = _rs_weight(theta_p[:k], m, nu) / nu * np.exp(-sigma * log_n) \
            * (1 + 2 * np.cos(tau0 * log_n)) ** 2
        total += float(terms.sum())
        nu += 1
        k = int(np.sum(primes.astype(np.float64) ** nu <= x))
    return total
