# symuniv/cli.py
"""Command-line front end: `symuniv <command> [options]`."""
import argparse
import logging
import math
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd

from .errors import ConfigError, SymUnivError
from .kinds import KIND_CONFIGS, LKind
from .lvalue import (DEFAULT_EULER_P, EULER_PRODUCT, MODES, TERMS_PER_X, EvalParams, eval_L,
                     mean_square)
from .modform import (SUPPORTED_WEIGHTS, coefficient_frame, load_or_build_form,
                      sato_tate_statistics)
from .prime_stats import geometric_cutoffs, pi_delta, prime_sums, sieve_primes, theta_curve
from .random_model import DEFAULT_P_MAX, distribution_compare
from .sympower import dirichlet_coefficients, export_coefficients
from .universality import (DiscRegion, constant_target, shift_search, target_from_csv,
                           target_jets, vector_target_search)
from .utils import default_cache_dir, dumps_json, provenance, write_json

logger = logging.getLogger(__name__)

COMMANDS = ["coeffs", "angles", "pnt", "lvalue", "mean-square",
            "random-model", "universality", "verify"]


@dataclass
class RunConfig:
    command: str
    weight: int = 12
    kind: Optional[str] = None
    n_coeffs: Optional[int] = None
    cache_path: Optional[str] = None
    seed: Optional[int] = None
    threads: int = 1
    as_json: bool = False
    params: Dict = field(default_factory=dict)

    def validate(self) -> None:
        """Collect every problem before any computation starts."""
        problems: List[str] = []
        if self.command not in COMMANDS:
            problems.append(f"unknown command {self.command!r}")
        if self.weight not in SUPPORTED_WEIGHTS:
            problems.append(
                f"weight {self.weight} unsupported; choose from {sorted(SUPPORTED_WEIGHTS)}")
        if self.kind is not None and self.kind not in KIND_CONFIGS:
            problems.append(f"kind {self.kind!r} unsupported; choose from {list(KIND_CONFIGS)}")
        if self.n_coeffs is not None and self.n_coeffs < 1:
            problems.append(f"--n-coeffs must be >= 1, got {self.n_coeffs}")
        if self.threads == 0 or self.threads < -1:
            problems.append(f"--threads must be positive or -1, got {self.threads}")
        p = self.params
        if p.get("m") is not None and not 1 <= p["m"] <= 4:
            problems.append(f"--m must be in 1..4, got {p['m']}")
        if p.get("x") is not None and p["x"] < 2:
            problems.append(f"--x must be >= 2, got {p['x']}")
        if p.get("delta") is not None and not 0 <= p["delta"] < 1:
            problems.append(f"--delta must lie in [0, 1), got {p['delta']}")
        if p.get("mode") is not None and p["mode"] not in MODES:
            problems.append(f"--mode must be one of {MODES}, got {p['mode']!r}")
        for name in ("T", "dt", "radius"):
            if p.get(name) is not None and p[name] <= 0:
                problems.append(f"--{name} must be positive, got {p[name]}")
        for name in ("n_shift", "n_model"):
            if p.get(name) is not None and p[name] < 100:
                problems.append(f"--{name.replace('_', '-')} must be >= 100, got {p[name]}")
        if p.get("jets") is not None and not 1 <= p["jets"] <= 5:
            problems.append(f"--jets must be in 1..5, got {p['jets']}")
        target = p.get("target")
        if target is not None and not (target.startswith("const:") or target.startswith("file:")):
            problems.append(f"--target must be const:<value> or file:<path>, got {target!r}")
        if problems:
            raise ConfigError(problems)

    @property
    def lkind(self) -> LKind:
        if self.kind is not None:
            return LKind.parse(self.kind)
        return LKind("sym", self.params.get("m") or 1)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--weight", type=int, default=12, help="Weight k of the eigenform")
    parser.add_argument("--n-coeffs", type=int, default=None,
                        help="q-expansion length (default: what the command needs)")
    parser.add_argument("--cache", default=None,
                        help="Coefficient cache directory (default: $SYMUNIV_CACHE)")
    parser.add_argument("--threads", type=int, default=1, help="Worker threads (-1 for all)")
    parser.add_argument("--json", action="store_true", help="Machine-readable JSON output")
    parser.add_argument("--out", default=None, help="Artifact path")
    parser.add_argument("--verbose", action="store_true", help="Log progress to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symuniv",
        description="Symmetric power L-functions of level-one eigenforms")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coeffs", help="Exact q-expansion coefficients as CSV")
    _add_common(p)
    p.add_argument("--n", type=int, required=True, help="Number of coefficients")
    p.add_argument("--kind", default=None, help="Also export lambda_F(n) for this kind")
    p.add_argument("--kind-out", default=None, help="Path of the lambda_F CSV")

    p = sub.add_parser("angles", help="Satake angles and Sato-Tate statistics")
    _add_common(p)
    p.add_argument("--x", type=int, required=True, help="Prime cutoff")

    p = sub.add_parser("pnt", help="Prime number theorem sums")
    _add_common(p)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--x", type=int, required=True)
    p.add_argument("--delta", type=float, default=None, help="Also report P_delta densities")
    p.add_argument("--curve", default=None, help="CSV of (x, theta/x) on a geometric grid")

    p = sub.add_parser("lvalue", help="L(s, F) at one point")
    _add_common(p)
    p.add_argument("--kind", default="sym2")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--mode", default="smoothed", help="smoothed or euler (euler_product)")
    p.add_argument("--X", type=float, default=None, help="Smoothing length")

    p = sub.add_parser("mean-square", help="Mean square of |L(sigma + it)|")
    _add_common(p)
    p.add_argument("--kind", default="sym2")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--T", type=float, default=2000.0)
    p.add_argument("--dt", type=float, default=0.1)

    p = sub.add_parser("random-model", help="Shifts of L against random Euler products")
    _add_common(p)
    p.add_argument("--kind", default="sym2")
    p.add_argument("--sigma", type=float, default=0.8)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--T", type=float, default=5000.0)
    p.add_argument("--n-shift", type=int, default=2000)
    p.add_argument("--n-model", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--p-max", type=int, default=DEFAULT_P_MAX)
    p.add_argument("--samples-out", default=None, help="CSV of raw samples")

    p = sub.add_parser("universality", help="Shift search against a target on a disc")
    _add_common(p)
    p.add_argument("--kind", default="sym2")
    p.add_argument("--center", type=float, default=None)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--target", default="const:1.0", help="const:<value> or file:<csv>")
    p.add_argument("--T", type=float, default=2000.0)
    p.add_argument("--dt", type=float, default=0.05)
    p.add_argument("--eps", type=float, default=0.3)
    p.add_argument("--jets", type=int, default=None,
                   help="Search derivative jets of this length instead")
    p.add_argument("--sigma", type=float, default=None, help="Jet search abscissa")
    p.add_argument("--table-out", default=None, help="CSV of (t, sup_err)")

    p = sub.add_parser("verify", help="Run the invariant verification suite")
    _add_common(p)
    p.add_argument("--level", choices=["quick", "full"], default="quick")
    return parser


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    skip = {"command", "weight", "kind", "n_coeffs", "cache", "threads", "json", "verbose", "seed"}
    params = {k: v for k, v in vars(args).items() if k not in skip}
    if params.get("mode") == "euler":
        params["mode"] = EULER_PRODUCT
    return RunConfig(
        command=args.command,
        weight=args.weight,
        kind=getattr(args, "kind", None),
        n_coeffs=args.n_coeffs,
        cache_path=args.cache or default_cache_dir(),
        seed=getattr(args, "seed", None),
        threads=args.threads,
        as_json=args.json,
        params=params,
    )


def _required_coefficients(config: RunConfig) -> int:
    p = config.params
    cmd = config.command
    if cmd == "coeffs":
        return p["n"]
    if cmd in ("angles", "pnt"):
        return p["x"]
    if cmd == "lvalue":
        X = p["X"] if p.get("X") is not None else EvalParams.for_height(p["t"])
        if p.get("mode") == EULER_PRODUCT:
            return 2 * DEFAULT_EULER_P
        # twice the terms for the stability run
        return 2 * int(math.ceil(TERMS_PER_X * X))
    if cmd == "mean-square":
        return int(math.ceil(TERMS_PER_X * EvalParams.for_height(p["T"])))
    if cmd == "random-model":
        X = EvalParams.for_height(abs(p["t"]) + p["T"])
        return max(int(math.ceil(TERMS_PER_X * X)), p["p_max"])
    if cmd == "universality":
        return int(math.ceil(TERMS_PER_X * EvalParams.for_height(p["T"] + 0.5)))
    return 1


def _emit(config: RunConfig, payload: Dict, stream=None) -> None:
    stream = stream or sys.stdout
    if config.as_json:
        stream.write(dumps_json(payload) + "\n")
    else:
        for key in sorted(payload):
            stream.write(f"{key}: {payload[key]}\n")
    if config.params.get("out") and config.command != "coeffs":
        write_json(config.params["out"], payload)


def _run_coeffs(config: RunConfig, form) -> Dict:
    p = config.params
    out = p.get("out") or f"weight{form.weight}_N{form.N}.csv"
    coefficient_frame(form).to_csv(out, index=False, float_format="%.17g")
    write_json(out + ".json", provenance(form.weight, None, form.N, config.seed))
    payload = {"csv": out, "rows": int(form.N)}
    if config.kind is not None:
        kind_out = p.get("kind_out") or f"{config.kind}_weight{form.weight}_N{form.N}.csv"
        export_coefficients(dirichlet_coefficients(form, config.lkind, form.N), kind_out)
        payload["kind_csv"] = kind_out
    return payload


def _run_angles(config: RunConfig, form) -> Dict:
    x = config.params["x"]
    primes = sieve_primes(x)
    if config.params.get("out"):
        pd.DataFrame({"p": primes, "theta": form.satake_angles(primes)}).to_csv(
            config.params["out"], index=False, float_format="%.17g")
        config.params["out"] = None
    return {"sato_tate": sato_tate_statistics(form, x)}


def _run_pnt(config: RunConfig, form) -> Dict:
    p = config.params
    m = config.lkind.m if config.kind else p["m"]
    payload = {"report": prime_sums(form, m, p["x"]).to_dict()}
    if p.get("delta") is not None:
        payload["pi_delta"] = pi_delta(form, m, p["delta"], p["x"], a=p["x"] // 2)
    if p.get("curve"):
        theta_curve(form, m, geometric_cutoffs(p["x"])).to_csv(
            p["curve"], index=False, float_format="%.17g")
        payload["curve_csv"] = p["curve"]
    return payload


def _run_lvalue(config: RunConfig, form) -> Dict:
    p = config.params
    s = complex(p["sigma"], p["t"])
    params = EvalParams(X=p.get("X"), mode=p.get("mode") or "smoothed")
    result = eval_L(form, config.lkind, s, params)
    return {"s": s, **result.to_dict()}


def _run_mean_square(config: RunConfig, form) -> Dict:
    p = config.params
    return mean_square(form, config.lkind, p["sigma"], p["T"], p["dt"], n_jobs=config.threads)


def _run_random_model(config: RunConfig, form) -> Dict:
    p = config.params
    report, samples = distribution_compare(
        form, config.lkind, complex(p["sigma"], p["t"]), p["T"], p["n_shift"], p["n_model"],
        seed=config.seed or 0, P_max=p["p_max"], n_jobs=config.threads)
    if p.get("samples_out"):
        samples.to_csv(p["samples_out"], index=False, float_format="%.17g")
    return report


def _run_universality(config: RunConfig, form) -> Dict:
    p = config.params
    kind = config.lkind
    target_spec = p["target"]
    if target_spec.startswith("const:"):
        target = constant_target(complex(target_spec[len("const:"):]))
    else:
        target = target_from_csv(target_spec[len("file:"):])
    if p.get("jets") is not None:
        sigma = p["sigma"] if p.get("sigma") is not None else KIND_CONFIGS[kind.label]["disc_center"]
        jets = target_jets(target, kind, sigma, p["jets"])
        payload = vector_target_search(form, kind, sigma, jets, p["T"], p["dt"],
                                       n_jobs=config.threads)
        payload.update({"target": target_spec, "target_jets": jets})
        return payload
    disc = DiscRegion.for_kind(kind, p.get("center"), p.get("radius"))
    result = shift_search(form, kind, disc, target, p["T"], p["dt"], p["eps"],
                          n_jobs=config.threads)
    if p.get("table_out"):
        result.to_csv(p["table_out"])
    payload = result.to_dict()
    payload.update({"disc": {"center": disc.center, "radius": disc.radius},
                    "target": target_spec, "target_residual": target.residual})
    return payload


RUNNERS = {
    "coeffs": _run_coeffs,
    "angles": _run_angles,
    "pnt": _run_pnt,
    "lvalue": _run_lvalue,
    "mean-square": _run_mean_square,
    "random-model": _run_random_model,
    "universality": _run_universality,
}


def _run_verify(config: RunConfig) -> int:
    from .verify import verify_suite
    report = verify_suite(config.params["level"], cache_dir=config.cache_path,
                          weight=config.weight, n_jobs=config.threads)
    payload = {
        "level": config.params["level"],
        "passed": bool(report["passed"].all()),
        "checks": report.to_dict(orient="records"),
        "failing": report.loc[~report["passed"], "name"].tolist(),
    }
    _emit(config, payload)
    return 0 if payload["passed"] else 1


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    """Parse argv, run one command and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr)

    try:
        config = _config_from_args(args)
        config.validate()
        if config.command == "verify":
            return _run_verify(config)
        n_coeffs = config.n_coeffs or _required_coefficients(config)
        form = load_or_build_form(config.weight, n_coeffs, config.cache_path)
        payload = RUNNERS[config.command](config, form)
        kind_label = config.lkind.label if config.command not in ("coeffs", "angles") else config.kind
        payload["provenance"] = provenance(config.weight, kind_label, form.N, config.seed)
        _emit(config, payload)
        return 0
    except SymUnivError as e:
        sys.stderr.write(dumps_json(e.to_dict()) + "\n")
        return 1
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        logger.debug("I/O failure", exc_info=True)
        sys.stderr.write(dumps_json({"error": "io", "message": str(e)}) + "\n")
        return 1


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
