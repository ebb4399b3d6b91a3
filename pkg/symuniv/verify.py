# symuniv/verify.py
"""Invariant verification suite behind `symuniv verify`."""
import logging
import math
from collections import Counter
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from .errors import InvalidArgumentError, SymUnivError
from .kinds import KIND_CONFIGS, LKind, RankinSelberg, Sym
from .lvalue import EvalParams, functional_equation_check, gamma_spec, mean_square, smoothed_grid
from .modform import (HeckeEigenform, find_cached_form, hecke_relation_failures, load_form,
                      qexp_delta, qexp_delta_product_exact, qexp_newform, save_form, truncate_form)
from .prime_stats import pi_delta, prime_sums, sieve_primes
from .random_model import distribution_compare, monte_carlo_moments, support_check
from .sympower import (local_factor, log_deriv_oracle, von_mangoldt_rs,
                       zeta_factorization_residual)
from .universality import (DiscRegion, derivative_vector, good_set_stability, shift_grid,
                           shift_search, vector_target_search)

logger = logging.getLogger(__name__)

LEVELS = ["quick", "full"]
REPORT_COLUMNS = ["name", "measured", "tolerance", "passed", "detail"]

HECKE_BOUND = 300


def _get_level_config(level: str) -> Dict:
    """Problem sizes per level; full reproduces the acceptance runs."""
    if level == "quick":
        return {
            'n_coeffs': 100_000,
            'dual_route_N': 2_000,
            'von_mangoldt_primes': 30,
            'zeta_primes': 100,
            'pnt_x': 100_000,
            'pnt_tol': 0.1,
            'delta_windows': (10_000,),
            'mean_square': {'sigma': 1.5, 'T': 200.0, 'tol': 0.05},
            'moments': {'sigma': 0.9, 'n': 500, 'p_max': 10_000},
            'support': {'n': 200, 'p_max': 10_000},
            'ks': None,
            'shift': {'T': 20.0, 'dt': 0.05, 't0_index': 267},
            'good_set': False,
        }
    return {
        'n_coeffs': 1_000_000,
        'dual_route_N': 10_000,
        'von_mangoldt_primes': 100,
        'zeta_primes': 1_000,
        'pnt_x': 1_000_000,
        'pnt_tol': 0.05,
        'delta_windows': (10_000, 100_000),
        'mean_square': {'sigma': 0.8, 'T': 2000.0, 'tol': 0.15},
        'moments': {'sigma': 0.8, 'n': 10_000, 'p_max': 100_000},
        'support': {'n': 10_000, 'p_max': 10_000},
        'ks': {'sigma': 0.8, 'T': 5000.0, 'n': 2000, 'p_max': 100_000, 'tol': 0.05},
        'shift': {'T': 500.0, 'dt': 0.05, 't0_index': 7321},
        'good_set': True,
    }


def _row(name: str, measured: float, tolerance: float, passed: bool, detail: str = "") -> Dict:
    return {"name": name, "measured": float(measured), "tolerance": float(tolerance),
            "passed": bool(passed), "detail": detail}


class _Context:
    """Forms shared by the checks; cached files are read without checksum so faults surface."""

    def __init__(self, weight: int, cache_dir: Optional[str], n_coeffs: int, n_jobs: int):
        self.weight = weight
        self.cache_dir = cache_dir
        self.n_coeffs = n_coeffs
        self.n_jobs = n_jobs
        self._forms: Dict = {}

    def form(self, k: Optional[int] = None, N: Optional[int] = None) -> HeckeEigenform:
        k = self.weight if k is None else k
        N = self.n_coeffs if N is None else N
        if (k, N) not in self._forms:
            path = find_cached_form(k, N, self.cache_dir) if self.cache_dir else None
            if path is not None:
                f = truncate_form(load_form(path, verify_checksum=False), N)
            else:
                f = qexp_newform(k, N)
                if self.cache_dir:
                    save_form(f, self.cache_dir)
            self._forms[(k, N)] = f
        return self._forms[(k, N)]


def check_dual_route(ctx: _Context, cfg: Dict) -> List[Dict]:
    N = cfg['dual_route_N']
    theta_route = qexp_delta(N).coeffs
    product_route = qexp_delta_product_exact(N).coeffs
    bad = [n for n, (a, b) in enumerate(zip(theta_route, product_route)) if a != b]
    detail = f"first mismatch at n={bad[0]}" if bad else f"exact for n <= {N}"
    return [_row("delta_dual_route", len(bad), 0, not bad, detail)]


def _suspect_index(failures) -> int:
    counts = Counter(i for pair in failures for i in pair if i > 1)
    return counts.most_common(1)[0][0]


def check_hecke(ctx: _Context, cfg: Dict) -> List[Dict]:
    rows = []
    for k in (12, 16):
        failures = hecke_relation_failures(ctx.form(k, HECKE_BOUND), HECKE_BOUND)
        if failures:
            detail = (f"{len(failures)} failing pairs; offending n={_suspect_index(failures)}; "
                      f"first (m, n)={failures[0]}")
        else:
            detail = f"mn <= {HECKE_BOUND}"
        rows.append(_row(f"hecke_relation_k{k}", len(failures), 0, not failures, detail))
    return rows


def check_deligne(ctx: _Context, cfg: Dict) -> List[Dict]:
    f = ctx.form()
    primes = sieve_primes(f.N)
    lam = np.abs(f.normalized[primes])
    worst = int(np.argmax(lam))
    tol = 2 + 1e-12
    return [_row("deligne_bound", lam[worst], tol, lam[worst] <= tol,
                 f"p={int(primes[worst])}, p <= {f.N}")]


def check_von_mangoldt(ctx: _Context, cfg: Dict) -> List[Dict]:
    f = ctx.form()
    worst = 0.0
    for m in range(1, 5):
        kind = RankinSelberg(m)
        for p in sieve_primes(cfg['von_mangoldt_primes']):
            oracle = log_deriv_oracle(local_factor(f, int(p), kind), 6)
            for nu in range(1, 7):
                closed = von_mangoldt_rs(f, m, int(p), nu).value
                worst = max(worst, abs(closed - oracle[nu - 1]))
    return [_row("von_mangoldt_vs_oracle", worst, 1e-9, worst <= 1e-9,
                 f"p <= {cfg['von_mangoldt_primes']}, nu <= 6, m = 1..4")]


def check_zeta_factorization(ctx: _Context, cfg: Dict) -> List[Dict]:
    f = ctx.form()
    worst = max(zeta_factorization_residual(f, int(p), m)
                for p in sieve_primes(cfg['zeta_primes']) for m in range(1, 5))
    return [_row("zeta_factorization", worst, 1e-12, worst <= 1e-12,
                 f"p <= {cfg['zeta_primes']}, m = 1..4")]


def check_pnt(ctx: _Context, cfg: Dict) -> List[Dict]:
    f = ctx.form()
    x, tol = cfg['pnt_x'], cfg['pnt_tol']
    rows = []
    for m in range(1, 5):
        report = prime_sums(f, m, x)
        gap = max(abs(report.theta_ratio - 1), abs(report.psi_ratio - 1))
        rows.append(_row(f"pnt_m{m}", gap, tol, gap <= tol,
                         f"theta/x={report.theta_ratio:.6f}, psi/x={report.psi_ratio:.6f}, x={x}"))
    return rows


def check_delta_density(ctx: _Context, cfg: Dict) -> List[Dict]:
    f = ctx.form()
    rows = []
    for delta in (0.25, 0.5, 0.75):
        for a in cfg['delta_windows']:
            report = pi_delta(f, 1, delta, 2 * a, a=a)
            margin = report['ratio'] - (report['lower_bound'] - 0.05)
            rows.append(_row(f"p_delta_density_d{delta}_a{a}", report['ratio'],
                             report['lower_bound'] - 0.05, margin >= 0,
                             f"window ({a}, {2 * a}]"))
    return rows


def check_gamma(ctx: _Context, cfg: Dict) -> List[Dict]:
    rows = []
    bad = [label for label in KIND_CONFIGS
           if gamma_spec(LKind.parse(label), ctx.weight).degree != LKind.parse(label).degree]
    rows.append(_row("gamma_degree", len(bad), 0, not bad,
                     f"mismatched kinds: {bad}" if bad else "all eight kinds"))
    fe = functional_equation_check(ctx.form(ctx.weight, 100))
    expected = 1 if ctx.weight % 4 == 0 else -1
    rows.append(_row("functional_equation_sym1", fe.residual, 1e-8,
                     fe.residual < 1e-8 and fe.epsilon == expected,
                     f"epsilon={fe.epsilon}, expected {expected}"))
    return rows


def check_mean_square(ctx: _Context, cfg: Dict) -> List[Dict]:
    ms = cfg['mean_square']
    N = int(math.ceil(10 * EvalParams.for_height(ms['T'])))
    report = mean_square(ctx.form(N=max(N, ctx.n_coeffs)), Sym(2), ms['sigma'], ms['T'],
                         n_jobs=ctx.n_jobs)
    gap = abs(report['ratio'] - 1)
    return [_row("mean_square_sym2", gap, ms['tol'], gap <= ms['tol'],
                 f"ratio={report['ratio']:.6f}, sigma={ms['sigma']}, T={ms['T']}")]


def check_random_model(ctx: _Context, cfg: Dict) -> List[Dict]:
    f = ctx.form()
    mo = cfg['moments']
    s = complex(mo['sigma'], 0.0)
    report = monte_carlo_moments(f, Sym(2), s, mo['n'], P_max=mo['p_max'], n_jobs=ctx.n_jobs)
    rows = [
        _row("model_mean", report['mean_z'], 3.0, report['mean_z'] <= 3.0,
             f"mean={report['mean']:.6f} se={report['mean_se']:.3g}"),
        _row("model_second_moment", report['second_moment_z'], 3.0,
             report['second_moment_z'] <= 3.0,
             f"second={report['second_moment']:.6f} ref={report['second_moment_ref']:.6f}"),
    ]
    su = cfg['support']
    support = support_check(f, Sym(2), su['n'], P_max=su['p_max'], n_jobs=ctx.n_jobs)
    rows.append(_row("model_support", support['min_abs'], 0.0, support['all_nonzero'],
                     f"{support['n_samples']} samples x {support['grid_points']} points"))
    ks = cfg['ks']
    if ks is not None:
        report, _ = distribution_compare(f, Sym(2), complex(ks['sigma'], 0.0), ks['T'],
                                         ks['n'], ks['n'], P_max=ks['p_max'], n_jobs=ctx.n_jobs)
        rows.append(_row("shift_vs_model_ks_abs", report['ks_abs'], ks['tol'],
                         report['ks_abs'] <= ks['tol'], f"T={ks['T']}, n={ks['n']}"))
    return rows


def check_universality(ctx: _Context, cfg: Dict) -> List[Dict]:
    sh = cfg['shift']
    kind = Sym(2)
    disc = DiscRegion.for_kind(kind)
    X = EvalParams.for_height(sh['T'] + disc.radius)
    f = ctx.form(N=max(ctx.n_coeffs, int(math.ceil(10 * X))))
    t0 = float(shift_grid(sh['T'], sh['dt'])[sh['t0_index']])

    def hidden(z):
        return smoothed_grid(f, kind, z, [t0], X)[:, 0]

    rows = []
    eps = 0.5 * float(np.abs(hidden(disc.boundary(128))).max())
    result = shift_search(f, kind, disc, hidden, sh['T'], sh['dt'], eps, X=X, n_jobs=ctx.n_jobs)
    recovered = result.best_err <= 1e-3 and abs(result.best_t - t0) <= sh['dt']
    rows.append(_row("hidden_shift", result.best_err, 1e-3, recovered,
                     f"t0={t0}, best_t={result.best_t}, good_set={result.good_set_measure:.4f}"))
    if cfg['good_set']:
        fine = shift_search(f, kind, disc, hidden, sh['T'], sh['dt'] / 2, eps, X=X,
                            n_jobs=ctx.n_jobs)
        change = good_set_stability(result, fine)
        rows.append(_row("good_set_stability", change, 0.2, change < 0.2,
                         f"coarse={result.good_set_measure:.4f}, fine={fine.good_set_measure:.4f}"))

    sigma = disc.center
    jets = derivative_vector(f, kind, sigma, t0, 2, X=X)
    h = 1e-5
    around = smoothed_grid(f, kind, [sigma + h, sigma - h], [t0], X)[:, 0]
    fd_gap = abs(jets[1] - (around[0] - around[1]) / (2 * h))
    rows.append(_row("jets_vs_finite_difference", fd_gap, 1e-6, fd_gap <= 1e-6, f"t={t0}"))

    target = derivative_vector(f, kind, sigma, t0, 3, X=X)
    found = vector_target_search(f, kind, sigma, target, sh['T'], sh['dt'], X=X,
                                 n_jobs=ctx.n_jobs)
    rows.append(_row("hidden_jets", found['distance'], 1e-3, found['distance'] <= 1e-3,
                     f"t0={t0}, best_t={found['best_t']}, J=3"))
    return rows


CHECKS: Dict[str, Callable[[_Context, Dict], List[Dict]]] = {
    'dual_route': check_dual_route,
    'hecke': check_hecke,
    'deligne': check_deligne,
    'von_mangoldt': check_von_mangoldt,
    'zeta_factorization': check_zeta_factorization,
    'pnt': check_pnt,
    'delta_density': check_delta_density,
    'gamma': check_gamma,
    'mean_square': check_mean_square,
    'random_model': check_random_model,
    'universality': check_universality,
}


def verify_suite(
    level: str = "quick",
    cache_dir: Optional[str] = None,
    weight: int = 12,
    only: Optional[Sequence[str]] = None,
    n_jobs: int = 1,
    show_progress: bool = False
) -> pd.DataFrame:
    """
    Run the invariant checks and return one row per measured invariant.

    Args:
        level: 'quick' (seconds, 10^5-scale data) or 'full' (the acceptance runs)
        cache_dir: Coefficient cache; cached expansions are read as stored
        weight: Weight of the form used by the non-Hecke checks
        only: Subset of check names from CHECKS
        n_jobs: Worker threads for the sampled checks
        show_progress: Show a progress bar over checks

    Returns:
        DataFrame with columns name, measured, tolerance, passed, detail
    """
    if level not in LEVELS:
        raise InvalidArgumentError(f"Level must be one of {LEVELS}, got {level!r}")
    names = list(CHECKS) if only is None else list(only)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise InvalidArgumentError(f"Unknown checks {unknown}; choose from {list(CHECKS)}")

    cfg = _get_level_config(level)
    ctx = _Context(weight, cache_dir, cfg['n_coeffs'], n_jobs)
    rows: List[Dict] = []
    for name in tqdm(names, desc="verify", disable=not show_progress):
        try:
            rows.extend(CHECKS[name](ctx, cfg))
        except SymUnivError as e:
            logger.error("Check %s raised %s", name, e)
            rows.append(_row(name, float("nan"), float("nan"), False, f"{e.code}: {e}"))
    report = pd.DataFrame(rows, columns=REPORT_COLUMNS)
    failing = report.loc[~report["passed"], "name"].tolist()
    if failing:
        logger.warning("Failing invariants: %s", failing)
    else:
        logger.info("All %d invariants passed at level %s", len(report), level)
    return report
