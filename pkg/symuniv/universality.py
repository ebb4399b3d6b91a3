# symuniv/universality.py
"""
Finite-grid experiments around universality: exp-polynomial targets on a
disc K, searches for vertical shifts t with L(s + it, F) close to a target
uniformly on K, and searches for derivative jets.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from .errors import (ContourViolationError, HypothesisViolationError,
                     InvalidArgumentError, NonVanishingViolationError,
                     OutOfRegionError, ResolutionError)
from .kinds import KIND_CONFIGS, LKind
from .lvalue import EvalParams, smoothed_grid
from .modform import HeckeEigenform

logger = logging.getLogger(__name__)

DEFAULT_DEGREE = 8
DEFAULT_BOUNDARY = 128
MIN_BOUNDARY = 64
CAUCHY_NODES = 256
MAX_JETS = 5
# adjacent boundary samples may not differ in argument by more than this
MAX_PHASE_STEP = math.pi / 2


@dataclass(frozen=True)
class DiscRegion:
    center: float
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise InvalidArgumentError(f"Disc radius must be positive, got {self.radius}")

    @classmethod
    def for_kind(cls, kind: LKind, center: Optional[float] = None,
                 radius: Optional[float] = None) -> "DiscRegion":
        config = KIND_CONFIGS[kind.label]
        disc = cls(config["disc_center"] if center is None else center,
                   config["disc_radius"] if radius is None else radius)
        disc.validate(kind)
        return disc

    def validate(self, kind: LKind) -> None:
        if not (self.center - self.radius > kind.sigma_F and self.center + self.radius < 1):
            raise OutOfRegionError(
                f"Disc |s - {self.center}| <= {self.radius} must lie inside "
                f"{kind.sigma_F:.6g} < Re(s) < 1 for {kind}")

    def boundary(self, n: int) -> np.ndarray:
        angles = 2 * math.pi * np.arange(n) / n
        return self.center + self.radius * np.exp(1j * angles)


@dataclass
class PolyExpTarget:
    """exp(q(u)) with u = (s - center) / scale and q given by increasing coefficients."""

    coeffs: np.ndarray
    center: complex = 0.0
    scale: float = 1.0
    residual: float = 0.0

    def log(self, s) -> np.ndarray:
        u = (np.asarray(s, dtype=np.complex128) - self.center) / self.scale
        return np.polynomial.polynomial.polyval(u, self.coeffs)

    def __call__(self, s) -> np.ndarray:
        return np.exp(self.log(s))


def _winding(phase_steps: np.ndarray) -> int:
    return int(round(float(np.sum(phase_steps)) / (2 * math.pi)))


def _wrapped_steps(values: np.ndarray, closed: bool) -> np.ndarray:
    angles = np.angle(values)
    if closed:
        angles = np.append(angles, angles[0])
    return (np.diff(angles) + math.pi) % (2 * math.pi) - math.pi


def poly_exp_target(
    points: Sequence[complex],
    values: Sequence[complex],
    degree: int = DEFAULT_DEGREE,
    closed: bool = True,
    center: Optional[complex] = None,
    scale: Optional[float] = None
) -> PolyExpTarget:
    """
    Least-squares polynomial q with exp(q) matching samples of a target.

    Args:
        points: Sample locations, in order along the boundary curve
        values: Target values at the points
        degree: Polynomial degree
        closed: Whether the samples go once around a closed curve
        center: Expansion centre (default: mean of points)
        scale: Expansion scale (default: max distance from centre)

    Returns:
        PolyExpTarget with the achieved sup residual |exp(q) - phi| on the samples
    """
    z = np.asarray(points, dtype=np.complex128)
    phi = np.asarray(values, dtype=np.complex128)
    if z.shape != phi.shape:
        raise InvalidArgumentError("points and values must have the same length")
    if z.size < 2 * (degree + 1):
        raise InvalidArgumentError(
            f"Degree {degree} needs at least {2 * (degree + 1)} samples, got {z.size}")
    zero = np.flatnonzero(phi == 0)
    if zero.size:
        raise NonVanishingViolationError(f"Target vanishes at sample {z[zero[0]]}")
    steps = _wrapped_steps(phi, closed)
    if np.any(np.abs(steps) > MAX_PHASE_STEP):
        raise ResolutionError(
            f"Argument jumps by {np.abs(steps).max():.3f} between adjacent samples; densify")
    if closed and _winding(steps) != 0:
        raise HypothesisViolationError(
            f"Target winds {_winding(steps)} times around 0 on the boundary; it has zeros inside")
    log_phi = np.log(np.abs(phi)) + 1j * np.unwrap(np.angle(phi))
    if center is None:
        center = complex(z.mean())
    if scale is None:
        scale = float(np.abs(z - center).max()) or 1.0
    u = (z - center) / scale
    vander = np.polynomial.polynomial.polyvander(u, degree)
    coeffs, *_ = np.linalg.lstsq(vander, log_phi, rcond=None)
    target = PolyExpTarget(coeffs, center, scale)
    target.residual = float(np.max(np.abs(target(z) - phi)))
    return target


def sup_dist(g: Callable, h: Callable, K: DiscRegion, n_boundary: int = DEFAULT_BOUNDARY) -> float:
    """max |g - h| on equispaced boundary points of K."""
    if n_boundary < MIN_BOUNDARY:
        raise InvalidArgumentError(f"n_boundary must be >= {MIN_BOUNDARY}, got {n_boundary}")
    z = K.boundary(n_boundary)
    return float(np.max(np.abs(np.asarray(g(z)) - np.asarray(h(z)))))


@dataclass
class ShiftSearchResult:
    best_t: float
    best_err: float
    good_set_measure: float
    eps: float
    T: float
    dt: float
    n_boundary: int
    X: float
    table: pd.DataFrame = field(repr=False, default=None)

    def to_dict(self) -> Dict:
        return {
            "best_t": self.best_t,
            "best_err": self.best_err,
            "good_set_measure": self.good_set_measure,
            "eps": self.eps,
            "grid": {"T": self.T, "dt": self.dt, "n_boundary": self.n_boundary},
            "X": self.X,
        }

    def to_csv(self, path: str) -> None:
        self.table.to_csv(path, index=False, float_format="%.17g")


def shift_grid(T: float, dt: float) -> np.ndarray:
    if T <= 0 or dt <= 0:
        raise InvalidArgumentError(f"Need T > 0 and dt > 0, got T={T}, dt={dt}")
    return dt * np.arange(int(math.floor(T / dt + 1e-9)) + 1)


def search_height(K: DiscRegion, T: float) -> float:
    return EvalParams.for_height(T + K.radius)


def shift_search(
    f: HeckeEigenform,
    kind: LKind,
    K: DiscRegion,
    phi: Union[Callable, PolyExpTarget],
    T: float,
    dt: float,
    eps: float,
    n_boundary: int = DEFAULT_BOUNDARY,
    X: Optional[float] = None,
    n_jobs: int = 1,
    show_progress: bool = False
) -> ShiftSearchResult:
    """Scan t = 0, dt, ..., T for sup_K |L(s + it, F) - phi(s)|."""
    K.validate(kind)
    if n_boundary < MIN_BOUNDARY:
        raise InvalidArgumentError(f"n_boundary must be >= {MIN_BOUNDARY}, got {n_boundary}")
    z = K.boundary(n_boundary)
    target = np.asarray(phi(z), dtype=np.complex128)
    if np.any(target == 0) or _winding(_wrapped_steps(target, True)) != 0:
        raise HypothesisViolationError("Target must be non-vanishing on K")
    ts = shift_grid(T, dt)
    X = X if X is not None else search_height(K, T)
    values = smoothed_grid(f, kind, z, ts, X, n_jobs=n_jobs, show_progress=show_progress)
    errors = np.abs(values - target[:, None]).max(axis=0)
    best = int(np.argmin(errors))
    result = ShiftSearchResult(
        best_t=float(ts[best]),
        best_err=float(errors[best]),
        good_set_measure=float(np.mean(errors < eps)),
        eps=eps,
        T=T,
        dt=dt,
        n_boundary=n_boundary,
        X=X,
        table=pd.DataFrame({"t": ts, "sup_err": errors}),
    )
    logger.info("Shift search on %s: best t=%.4f err=%.3g good=%.4f",
                kind, result.best_t, result.best_err, result.good_set_measure)
    return result


def good_set_stability(coarse: ShiftSearchResult, fine: ShiftSearchResult) -> float:
    """Relative change of the good-set fraction between a grid and its refinement."""
    if coarse.good_set_measure == 0:
        return 0.0 if fine.good_set_measure == 0 else float("inf")
    return abs(fine.good_set_measure - coarse.good_set_measure) / coarse.good_set_measure


def _default_radius(kind: LKind, sigma: float) -> float:
    return (sigma - kind.sigma_F) / 2


def _check_contour(kind: LKind, sigma: float, t: float, rho: float) -> None:
    if rho <= 0:
        raise ContourViolationError(f"Contour radius must be positive, got {rho}")
    if sigma - rho <= kind.sigma_F:
        raise ContourViolationError(
            f"Contour of radius {rho} about Re(s) = {sigma} crosses sigma_F = {kind.sigma_F}")
    if kind.is_rankin_selberg and abs(complex(sigma, t) - 1) <= rho:
        raise ContourViolationError(f"Contour of radius {rho} reaches the pole of {kind} at s = 1")


def _jets_from_samples(samples: np.ndarray, J: int, rho: float) -> np.ndarray:
    """Taylor data from values on a circle: L^(j) = j! c_j / rho^j, per column."""
    n = samples.shape[0]
    c = np.fft.fft(samples, axis=0)[:J] / n
    scale = np.array([math.factorial(j) / rho ** j for j in range(J)])
    return c * scale[:, None]


def derivative_vector(
    f: HeckeEigenform,
    kind: LKind,
    sigma: float,
    t: float,
    J: int,
    rho: Optional[float] = None,
    X: Optional[float] = None
) -> np.ndarray:
    """(L, L', ..., L^(J-1)) at sigma + it by trapezoidal Cauchy quadrature."""
    if J < 1:
        raise InvalidArgumentError(f"J must be >= 1, got {J}")
    rho = _default_radius(kind, sigma) if rho is None else rho
    _check_contour(kind, sigma, t, rho)
    angles = 2 * math.pi * np.arange(CAUCHY_NODES) / CAUCHY_NODES
    nodes = sigma + rho * np.exp(1j * angles)
    # same X and N_terms as eval_L at sigma + it
    params = EvalParams(X=X).resolved(t)
    samples = smoothed_grid(f, kind, nodes, [t], params.X, params.N_terms)
    return _jets_from_samples(samples, J, rho)[:, 0]


def vector_target_search(
    f: HeckeEigenform,
    kind: LKind,
    sigma: float,
    target: Sequence[complex],
    T: float,
    dt: float,
    rho: Optional[float] = None,
    X: Optional[float] = None,
    n_jobs: int = 1,
    show_progress: bool = False
) -> Dict:
    """Grid t minimizing |derivative_vector(t) - target|; best effort, never fails on distance."""
    if not kind.sigma_F < sigma < 1:
        raise OutOfRegionError(f"sigma must lie in ({kind.sigma_F:.6g}, 1), got {sigma}")
    target = np.asarray(target, dtype=np.complex128)
    J = target.size
    if not 1 <= J <= MAX_JETS:
        raise InvalidArgumentError(f"Jet length must be in 1..{MAX_JETS}, got {J}")
    rho = _default_radius(kind, sigma) if rho is None else rho
    _check_contour(kind, sigma, 0.0, rho)
    ts = shift_grid(T, dt)
    angles = 2 * math.pi * np.arange(CAUCHY_NODES) / CAUCHY_NODES
    nodes = sigma + rho * np.exp(1j * angles)
    X = X if X is not None else EvalParams.for_height(T + rho)
    samples = smoothed_grid(f, kind, nodes, ts, X, n_jobs=n_jobs, show_progress=show_progress)
    jets = _jets_from_samples(samples, J, rho)
    distances = np.linalg.norm(jets - target[:, None], axis=0)
    best = int(np.argmin(distances))
    return {
        "kind": kind.label,
        "sigma": sigma,
        "J": J,
        "rho": rho,
        "X": X,
        "best_t": float(ts[best]),
        "distance": float(distances[best]),
        "grid": {"T": T, "dt": dt},
    }


def jet_target(jets: Sequence[complex], center: float) -> PolyExpTarget:
    """exp(p(s - center)) whose derivatives at `center` are the given jets."""
    jets = np.asarray(jets, dtype=np.complex128)
    if jets.size == 0:
        raise InvalidArgumentError("Need at least one jet")
    if jets[0] == 0:
        raise NonVanishingViolationError("The zeroth jet must be non-zero")
    a = jets / np.array([math.factorial(j) for j in range(jets.size)])
    # logarithm of the Taylor series a(x): k p_k a_0 = k a_k - sum_{j<k} j p_j a_{k-j}
    p = np.zeros(jets.size, dtype=np.complex128)
    p[0] = np.log(a[0])
    for k in range(1, jets.size):
        acc = k * a[k] - sum(j * p[j] * a[k - j] for j in range(1, k))
        p[k] = acc / (k * a[0])
    return PolyExpTarget(p, complex(center), 1.0)


def target_from_csv(path: str, degree: int = DEFAULT_DEGREE) -> PolyExpTarget:
    """Fit a target from boundary samples stored as CSV `re,im,phi_re,phi_im`."""
    df = pd.read_csv(path)
    missing = {"re", "im", "phi_re", "phi_im"} - set(df.columns)
    if missing:
        raise InvalidArgumentError(f"Target file {path} lacks columns {sorted(missing)}")
    points = df["re"].to_numpy() + 1j * df["im"].to_numpy()
    values = df["phi_re"].to_numpy() + 1j * df["phi_im"].to_numpy()
    return poly_exp_target(points, values, degree)


def constant_target(value: complex) -> PolyExpTarget:
    if value == 0:
        raise NonVanishingViolationError("Constant target must be non-zero")
    return PolyExpTarget(np.array([np.log(complex(value))]))


def target_jets(
    phi: Union[Callable, PolyExpTarget],
    kind: LKind,
    sigma: float,
    J: int,
    rho: Optional[float] = None
) -> np.ndarray:
    """(phi, phi', ..., phi^(J-1)) at sigma on the same contour derivative_vector uses."""
    if not 1 <= J <= MAX_JETS:
        raise InvalidArgumentError(f"Jet length must be in 1..{MAX_JETS}, got {J}")
    rho = _default_radius(kind, sigma) if rho is None else rho
    angles = 2 * math.pi * np.arange(CAUCHY_NODES) / CAUCHY_NODES
    nodes = sigma + rho * np.exp(1j * angles)
    samples = np.asarray(phi(nodes), dtype=np.complex128)[:, None]
    return _jets_from_samples(samples, J, rho)[:, 0]
