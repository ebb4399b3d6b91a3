# symuniv/modform.py
"""
Level-one Hecke eigenforms as exact q-expansions.

Series are exact Python integers. Multiplication replaces the schoolbook
convolution: products are computed modulo several 30-bit primes with a
float FFT over 10-bit limbs, then lifted back to integers by the Chinese
remainder theorem. The result is exact. Each limb convolution stays below
2^53, so the rounded FFT output is the true integer, and the primes
together exceed twice the a priori coefficient bound of the product.
"""
import json
import logging
import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import (CacheIntegrityError, DeligneViolationError,
                     InsufficientCacheError, InvalidArgumentError,
                     UnsupportedWeightError)
from .utils import ensure_directory, file_sha256, write_json

logger = logging.getLogger(__name__)

# dim S_k = 1 exactly for these weights; value is (a, b) with k - 12 = 4a + 6b
SUPPORTED_WEIGHTS: Dict[int, Tuple[int, int]] = {
    12: (0, 0), 16: (1, 0), 18: (0, 1), 20: (2, 0), 22: (1, 1), 26: (2, 1),
}

DELIGNE_SLACK = 1e-12
CACHE_COLUMNS = ["n", "c_exact", "lambda_norm"]

_LIMB_BITS = 10
_LIMB_MASK = (1 << _LIMB_BITS) - 1
_N_LIMBS = 3
_MODULUS_BITS = _LIMB_BITS * _N_LIMBS


@lru_cache(maxsize=None)
def _crt_moduli(count: int) -> Tuple[int, ...]:
    """The `count` largest primes below 2**30."""
    from .prime_stats import sieve_primes
    small = sieve_primes(1 << 15)
    moduli = []
    candidate = (1 << _MODULUS_BITS) - 1
    while len(moduli) < count:
        if all(candidate % p for p in small):
            moduli.append(candidate)
        candidate -= 2
    return tuple(moduli)


def _n_moduli_for_bits(bits: int) -> int:
    # one extra prime covers the sign and rounding of the bound
    return bits // (_MODULUS_BITS - 1) + 2


def _residues(coeffs: Sequence[int], modulus: int) -> np.ndarray:
    return (np.asarray(coeffs, dtype=object) % modulus).astype(np.int64)


def _mul_mod(a: np.ndarray, b: np.ndarray, modulus: int, length: int) -> np.ndarray:
    """(a * b mod q^length) mod `modulus` for residue arrays a, b."""
    same = b is a
    a = a[:length]
    b = a if same else b[:length]
    size = 1 << (len(a) + len(b) - 1).bit_length()
    fa = [np.fft.rfft(((a >> (_LIMB_BITS * i)) & _LIMB_MASK).astype(np.float64), size)
          for i in range(_N_LIMBS)]
    if same:
        fb = fa
    else:
        fb = [np.fft.rfft(((b >> (_LIMB_BITS * i)) & _LIMB_MASK).astype(np.float64), size)
              for i in range(_N_LIMBS)]
    out = np.zeros(length, dtype=np.int64)
    for w in range(2 * _N_LIMBS - 1):
        spectrum = sum(fa[i] * fb[w - i]
                       for i in range(_N_LIMBS) if 0 <= w - i < _N_LIMBS)
        conv = np.fft.irfft(spectrum, size)[:length]
        part = np.rint(conv).astype(np.int64) % modulus
        if len(part) < length:
            part = np.pad(part, (0, length - len(part)))
        out = (out + part * pow(2, _LIMB_BITS * w, modulus)) % modulus
    return out


def _crt_lift(residues: List[np.ndarray], moduli: Sequence[int]) -> List[int]:
    """Garner's mixed-radix lift to the symmetric range (-M/2, M/2]."""
    digits: List[np.ndarray] = []
    for i, mi in enumerate(moduli):
        t = residues[i] % mi
        for j in range(i):
            t = ((t - digits[j]) % mi) * pow(moduli[j], -1, mi) % mi
        digits.append(t)
    value = digits[-1].astype(object)
    for i in range(len(moduli) - 2, -1, -1):
        value = value * moduli[i] + digits[i].astype(object)
    total = math.prod(moduli)
    value = np.where(value > total // 2, value - total, value)
    return [int(v) for v in value]


class QSeries:
    """Exact integer q-expansion known through q^N."""

    def __init__(self, coeffs: Sequence[int], N: Optional[int] = None):
        coeffs = [int(c) for c in coeffs]
        if N is None:
            N = len(coeffs) - 1
        if N < 0:
            raise InvalidArgumentError("QSeries needs at least the constant term")
        coeffs = coeffs[:N + 1] + [0] * max(0, N + 1 - len(coeffs))
        self.coeffs = coeffs
        self.N = N

    @classmethod
    def one(cls, N: int) -> "QSeries":
        return cls([1], N)

    def __repr__(self):
        return f"QSeries(N={self.N}, coeffs={self.coeffs[:5]}...)"

    def __len__(self):
        return self.N + 1

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]

    def __eq__(self, other):
        return isinstance(other, QSeries) and self.N == other.N and self.coeffs == other.coeffs

    def max_abs(self) -> int:
        return max(abs(c) for c in self.coeffs)

    def truncate(self, N: int) -> "QSeries":
        return QSeries(self.coeffs, min(N, self.N))

    def shift(self, k: int) -> "QSeries":
        """Multiply by q^k, keeping the truncation bound."""
        return QSeries([0] * k + self.coeffs, self.N)

    def residues(self, modulus: int) -> np.ndarray:
        return _residues(self.coeffs, modulus)

    def __mul__(self, other):
        if isinstance(other, int):
            return QSeries([c * other for c in self.coeffs], self.N)
        N = min(self.N, other.N)
        bound = (N + 1) * self.max_abs() * other.max_abs()
        moduli = _crt_moduli(_n_moduli_for_bits(bound.bit_length()))
        products = []
        for modulus in moduli:
            ra = self.residues(modulus)
            rb = ra if other is self else other.residues(modulus)
            products.append(_mul_mod(ra, rb, modulus, N + 1))
        return QSeries(_crt_lift(products, moduli), N)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "QSeries":
        if exponent < 0:
            raise InvalidArgumentError("Only non-negative integer powers are supported")
        result = QSeries.one(self.N)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            exponent >>= 1
            if exponent:
                base = base * base
        return result


def _theta_cube(N: int) -> QSeries:
    """prod(1 - q^n)^3 = sum_k (-1)^k (2k+1) q^{k(k+1)/2} (Jacobi)."""
    coeffs = [0] * (N + 1)
    k = 0
    while k * (k + 1) // 2 <= N:
        coeffs[k * (k + 1) // 2] = (-1) ** k * (2 * k + 1)
        k += 1
    return QSeries(coeffs, N)


def _divisor_power_sums(exponent: int, N: int) -> List[int]:
    sigma = [0] * (N + 1)
    for d in range(1, N + 1):
        dk = d ** exponent
        for multiple in range(d, N + 1, d):
            sigma[multiple] += dk
    return sigma


def eisenstein_series(weight: int, N: int) -> QSeries:
    """E4 = 1 + 240 sum sigma_3(n) q^n and E6 = 1 - 504 sum sigma_5(n) q^n."""
    factors = {4: 240, 6: -504}
    if weight not in factors:
        raise InvalidArgumentError("Only E4 and E6 are needed for level one")
    sigma = _divisor_power_sums(weight - 1, N)
    coeffs = [1] + [factors[weight] * s for s in sigma[1:]]
    return QSeries(coeffs, N)


def qexp_delta(N: int) -> QSeries:
    """Delta = q * prod(1 - q^n)^24 through q^N via the eighth power of the theta cube."""
    if N < 1:
        raise InvalidArgumentError(f"Truncation bound N must be >= 1, got {N}")
    eta_cubed = _theta_cube(N - 1)
    delta = (eta_cubed ** 8).coeffs
    return QSeries([0] + delta, N)


def qexp_delta_product(N: int, modulus: int) -> np.ndarray:
    """q * prod_{n<=N}(1 - q^n)^24 mod `modulus`, by direct sparse binomial updates."""
    if N < 1:
        raise InvalidArgumentError(f"Truncation bound N must be >= 1, got {N}")
    binomials = [(-1) ** j * math.comb(24, j) % modulus for j in range(25)]
    series = np.zeros(N, dtype=np.int64)  # coefficients of q^0..q^{N-1}
    series[0] = 1
    for n in range(1, N):
        previous = series.copy()
        for j in range(1, min(24, (N - 1) // n) + 1):
            shift = n * j
            series[shift:] = (series[shift:] + binomials[j] * previous[:N - shift]) % modulus
    return np.concatenate([[0], series])


def qexp_delta_product_exact(N: int) -> QSeries:
    """Exact integers of the direct product, lifted from enough primes to cover |tau(n)| <= 2 n^6."""
    bits = 6 * max(N, 2).bit_length() + 2
    moduli = _crt_moduli(_n_moduli_for_bits(bits))
    return QSeries(_crt_lift([qexp_delta_product(N, m) for m in moduli], moduli), N)


@dataclass(frozen=True, eq=False)
class SatakeAngle:
    p: int
    theta: float

    @property
    def alpha(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True, eq=False)
class HeckeEigenform:
    """Normalized Hecke eigencuspform of level one."""

    weight: int
    exact_coeffs: List[int] = field(repr=False)
    normalized: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return len(self.exact_coeffs) - 1

    def c(self, n: int) -> int:
        return self.exact_coeffs[n]

    def lam(self, n: int) -> float:
        return float(self.normalized[n])

    def require(self, bound: int) -> None:
        if bound > self.N:
            raise InsufficientCacheError(
                f"Coefficients known up to n={self.N}, but n={bound} is needed")

    def satake_angles(self, primes: np.ndarray) -> np.ndarray:
        """theta_f(p) for an array of primes, Deligne-checked and clamped."""
        primes = np.asarray(primes, dtype=np.int64)
        if primes.size:
            self.require(int(primes.max()))
        lam = self.normalized[primes]
        bad = np.flatnonzero(np.abs(lam) > 2 + DELIGNE_SLACK)
        if bad.size:
            p = int(primes[bad[0]])
            raise DeligneViolationError(
                f"|lambda_f({p})| = {abs(lam[bad[0]]):.15g} exceeds 2; coefficient data is corrupted")
        return np.arccos(np.clip(lam / 2.0, -1.0, 1.0))


def _normalize(coeffs: Sequence[int], weight: int) -> np.ndarray:
    n = np.arange(len(coeffs), dtype=np.float64)
    scale = np.ones_like(n)
    scale[1:] = n[1:] ** ((weight - 1) / 2.0)
    values = np.array([float(c) for c in coeffs])
    return values / scale


def _check_weight(k: int) -> None:
    if k not in SUPPORTED_WEIGHTS:
        raise UnsupportedWeightError(
            f"Weight {k} unsupported; dim S_k = 1 only for k in {sorted(SUPPORTED_WEIGHTS)}")


def qexp_newform(k: int, N: int) -> HeckeEigenform:
    """The normalized cusp form Delta * E4^a * E6^b of weight k."""
    _check_weight(k)
    if N < 1:
        raise InvalidArgumentError(f"Truncation bound N must be >= 1, got {N}")
    a, b = SUPPORTED_WEIGHTS[k]
    form = qexp_delta(N)
    for _ in range(a):
        form = form * eisenstein_series(4, N)
    for _ in range(b):
        form = form * eisenstein_series(6, N)
    logger.info("Built weight %d eigenform through q^%d", k, N)
    return HeckeEigenform(k, form.coeffs, _normalize(form.coeffs, k))


def satake_angle(f: HeckeEigenform, p: int) -> SatakeAngle:
    theta = f.satake_angles(np.array([p]))[0]
    return SatakeAngle(p, float(theta))


def chebyshev_u(nu: int, x):
    """U_nu(x) by the three-term recurrence; works elementwise on arrays."""
    x = np.asarray(x, dtype=np.float64)
    prev = np.ones_like(x)
    if nu == 0:
        return prev
    cur = 2 * x
    for _ in range(nu - 1):
        prev, cur = cur, 2 * x * cur - prev
    return cur


def lambda_prime_power(f: HeckeEigenform, p: int, nu: int) -> float:
    """lambda_f(p^nu) = U_nu(cos theta_f(p))."""
    if nu < 0:
        raise InvalidArgumentError(f"nu must be >= 0, got {nu}")
    theta = satake_angle(f, p).theta
    return float(chebyshev_u(nu, math.cos(theta)))


def hecke_relation_failures(f: HeckeEigenform, bound: int = 300) -> List[Tuple[int, int]]:
    """All (m, n) with mn <= bound violating c(m)c(n) = sum_{d|(m,n)} d^{k-1} c(mn/d^2)."""
    limit = min(bound, f.N)
    c = f.exact_coeffs
    failures = []
    for m in range(1, limit + 1):
        for n in range(m, limit // m + 1):
            g = math.gcd(m, n)
            rhs = sum(d ** (f.weight - 1) * c[m * n // (d * d)]
                      for d in range(1, g + 1) if g % d == 0)
            if c[m] * c[n] != rhs:
                failures.append((m, n))
    return failures


def _cache_stem(k: int, N: int) -> str:
    return f"weight{k}_N{N}"


def coefficient_frame(f: HeckeEigenform) -> pd.DataFrame:
    """Rows (n, c_exact, lambda_norm) for n = 1..N; c_exact kept as decimal text."""
    return pd.DataFrame({
        "n": np.arange(1, f.N + 1),
        "c_exact": [str(c) for c in f.exact_coeffs[1:]],
        "lambda_norm": f.normalized[1:],
    })


def save_form(f: HeckeEigenform, cache_dir: str) -> str:
    """Write the coefficient CSV and its checksum sidecar; return the CSV path."""
    ensure_directory(cache_dir)
    path = os.path.join(cache_dir, _cache_stem(f.weight, f.N) + ".csv")
    coefficient_frame(f).to_csv(path, index=False, float_format="%.17g")
    write_json(path + ".json", {
        "weight": f.weight, "N": f.N, "sha256": file_sha256(path)})
    return path


def load_form(path: str, verify_checksum: bool = True) -> HeckeEigenform:
    """Read a coefficient CSV; exact integers are authoritative."""
    sidecar = path + ".json"
    with open(sidecar, encoding="utf-8") as fh:
        meta = json.load(fh)
    if verify_checksum and file_sha256(path) != meta["sha256"]:
        raise CacheIntegrityError(f"Checksum mismatch for coefficient cache {path}")
    df = pd.read_csv(path, dtype={"c_exact": str})
    if list(df.columns) != CACHE_COLUMNS:
        raise CacheIntegrityError(f"Unexpected header {list(df.columns)} in {path}")
    coeffs = [0] + [int(c) for c in df["c_exact"]]
    k = int(meta["weight"])
    return HeckeEigenform(k, coeffs, _normalize(coeffs, k))


def find_cached_form(k: int, N: int, cache_dir: str) -> Optional[str]:
    """Smallest cached expansion of weight k covering N, if any."""
    if not os.path.isdir(cache_dir):
        return None
    best = None
    prefix = f"weight{k}_N"
    for name in os.listdir(cache_dir):
        if name.startswith(prefix) and name.endswith(".csv"):
            size = int(name[len(prefix):-4])
            if size >= N and (best is None or size < best):
                best = size
    if best is None:
        return None
    return os.path.join(cache_dir, _cache_stem(k, best) + ".csv")


def load_or_build_form(
    k: int,
    N: int,
    cache_dir: Optional[str] = None,
    rebuild_on_mismatch: bool = True
) -> HeckeEigenform:
    """Cache-or-compute; cached expansions longer than N are truncated."""
    _check_weight(k)
    if cache_dir is None:
        return qexp_newform(k, N)
    path = find_cached_form(k, N, cache_dir)
    if path is not None:
        try:
            f = load_form(path)
            return truncate_form(f, N)
        except CacheIntegrityError as e:
            if not rebuild_on_mismatch:
                raise
            logger.warning("%s; rebuilding", e)
    f = qexp_newform(k, N)
    save_form(f, cache_dir)
    return f


def truncate_form(f: HeckeEigenform, N: int) -> HeckeEigenform:
    if N >= f.N:
        return f
    return HeckeEigenform(f.weight, f.exact_coeffs[:N + 1], f.normalized[:N + 1].copy())


def sato_tate_statistics(f: HeckeEigenform, x: int) -> Dict[str, float]:
    """Distance of the angle distribution at primes p <= x from (2/pi) sin^2."""
    from scipy.stats import kstest
    from .prime_stats import sieve_primes
    primes = sieve_primes(x)
    theta = f.satake_angles(primes)
    lam = 2 * np.cos(theta)

    def cdf(t):
        return (t - np.sin(t) * np.cos(t)) / np.pi

    result = kstest(theta, cdf)
    return {
        "x": x,
        "n_primes": int(primes.size),
        "ks_statistic": float(result.statistic),
        "ks_pvalue": float(result.pvalue),
        "mean_lambda": float(lam.mean()),
        "mean_lambda_sq": float((lam ** 2).mean()),
    }
