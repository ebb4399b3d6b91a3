# symuniv/core.py
import logging
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from .errors import UnsupportedKindError, UnsupportedWeightError
from .kinds import KIND_CONFIGS, LKind
from .lvalue import EvalParams, eval_L, mean_square
from .modform import SUPPORTED_WEIGHTS, HeckeEigenform, load_or_build_form
from .prime_stats import pi_delta, prime_sums
from .random_model import distribution_compare
from .sympower import DirichletCoefficients, dirichlet_coefficients
from .universality import (DiscRegion, PolyExpTarget, ShiftSearchResult,
                           constant_target, shift_search,
                           vector_target_search)

logger = logging.getLogger(__name__)


class SymPowerExperiment:
    """Experiments on one L-function sym^m f or sym^m f x sym^m f of a level-one eigenform."""

    SUPPORTED_KINDS: List[str] = list(KIND_CONFIGS)

    def __init__(
        self,
        kind: str = 'sym2',
        weight: int = 12,
        n_coeffs: int = 100_000,
        cache_dir: Optional[str] = None,
        n_jobs: int = 1,
        seed: int = 0,
        config: Optional[Dict] = None,
        show_progress: bool = False
    ):
        """Initialize the experiment.

        Args:
            kind: Kind label, one of sym1..sym4, rs1..rs4
            weight: Weight of the eigenform (dim S_k = 1)
            n_coeffs: Number of q-expansion coefficients to build or load
            cache_dir: Coefficient cache directory (None computes in memory)
            n_jobs: Number of parallel jobs
            seed: Base seed for random-model samples
            config: Overrides merged over the per-kind defaults
            show_progress: Show progress bars on long scans
        """
        if kind not in SymPowerExperiment.SUPPORTED_KINDS:
            raise UnsupportedKindError(
                f"Kind must be one of {SymPowerExperiment.SUPPORTED_KINDS}")
        if weight not in SUPPORTED_WEIGHTS:
            raise UnsupportedWeightError(
                f"Weight must be one of {sorted(SUPPORTED_WEIGHTS)}")

        self.kind = LKind.parse(kind)
        self.weight = weight
        self.n_coeffs = n_coeffs
        self.cache_dir = cache_dir
        self.n_jobs = n_jobs
        self.seed = seed
        self.show_progress = show_progress

        self.config = self._get_default_config()
        if config:
            self.config.update(config)

        self._form: Optional[HeckeEigenform] = None

    def _get_default_config(self) -> Dict:
        """Get default configuration based on kind."""
        defaults = {
            'disc_center': KIND_CONFIGS[self.kind.label]['disc_center'],
            'disc_radius': KIND_CONFIGS[self.kind.label]['disc_radius'],
            'n_boundary': 128,
            'dt': 0.05,
            'eps': 0.3,
            'p_max': 100_000,
        }
        if self.kind.is_rankin_selberg:
            # the strip is narrow; keep samples cheap
            defaults['p_max'] = 10_000
        return defaults

    @property
    def form(self) -> HeckeEigenform:
        if self._form is None:
            self._form = load_or_build_form(self.weight, self.n_coeffs, self.cache_dir)
        return self._form

    @property
    def disc(self) -> DiscRegion:
        return DiscRegion.for_kind(
            self.kind, self.config['disc_center'], self.config['disc_radius'])

    def coefficients(self, N: Optional[int] = None) -> DirichletCoefficients:
        return dirichlet_coefficients(self.form, self.kind, N or self.n_coeffs)

    def value(self, s: complex, mode: str = 'smoothed', X: Optional[float] = None) -> Dict:
        """L(s, F) with its stability estimate."""
        result = eval_L(self.form, self.kind, s, EvalParams(X=X, mode=mode))
        return result.to_dict()

    def process_points(
        self,
        points: Sequence[complex],
        output_csv: Optional[str] = None,
        mode: str = 'smoothed'
    ) -> pd.DataFrame:
        """Evaluate L(s, F) at many points; rows keep the input order."""
        form = self.form

        def evaluate(s):
            result = eval_L(form, self.kind, complex(s), EvalParams(mode=mode))
            return {'re_s': s.real, 'im_s': s.imag, 're_L': result.value.real,
                    'im_L': result.value.imag, 'stability': result.stability}

        points = [complex(s) for s in points]
        if self.n_jobs == 1:
            rows = [evaluate(s) for s in tqdm(points, disable=not self.show_progress)]
        else:
            rows = Parallel(n_jobs=self.n_jobs, prefer="threads")(
                delayed(evaluate)(s) for s in tqdm(points, disable=not self.show_progress))
        df = pd.DataFrame(rows)
        if output_csv:
            df.to_csv(output_csv, index=False, float_format="%.17g")
        return df

    def mean_square(self, sigma: float, T: float, dt: float = 0.1) -> Dict:
        return mean_square(self.form, self.kind, sigma, T, dt,
                           n_jobs=self.n_jobs, show_progress=self.show_progress)

    def pnt(self, x: int, delta: Optional[float] = None) -> Dict:
        report = prime_sums(self.form, self.kind.m, x).to_dict()
        if delta is not None:
            report['pi_delta'] = pi_delta(self.form, self.kind.m, delta, x, a=x // 2)
        return report

    def random_model(self, s: complex, T: float, n_shift: int, n_model: int):
        return distribution_compare(
            self.form, self.kind, s, T, n_shift, n_model, seed=self.seed,
            P_max=self.config['p_max'], n_jobs=self.n_jobs, show_progress=self.show_progress)

    def universality(
        self,
        target: Union[complex, PolyExpTarget],
        T: float,
        dt: Optional[float] = None,
        eps: Optional[float] = None
    ) -> ShiftSearchResult:
        if not isinstance(target, PolyExpTarget):
            target = constant_target(target)
        return shift_search(
            self.form, self.kind, self.disc, target, T,
            dt if dt is not None else self.config['dt'],
            eps if eps is not None else self.config['eps'],
            n_boundary=self.config['n_boundary'],
            n_jobs=self.n_jobs, show_progress=self.show_progress)

    def jets(self, sigma: float, target: Sequence[complex], T: float,
             dt: Optional[float] = None) -> Dict:
        return vector_target_search(
            self.form, self.kind, sigma, np.asarray(target), T,
            dt if dt is not None else self.config['dt'],
            n_jobs=self.n_jobs, show_progress=self.show_progress)
