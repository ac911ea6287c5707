"""Command-line interface: divergence values, conjugates, Moreau-Yosida
approximations and the validation suite.

Exit codes: 0 success, 2 input error, 3 solver failure.  Selftest failures
exit 1.  All randomness flows through the --seed flag, so output is
deterministic byte for byte for a fixed invocation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .conjugate import SolverConfig, conjugate_value_and_gradient, solve_gamma
from .errors import InputError, SolverError
from .estimator import AscentConfig, estimate_divergence
from .generators import GENERATOR_NAMES, get_spec
from .measures import DiscreteMeasure, exact_divergence, load_measure
from .moreau_yosida import MYConfig, MYParams, check_optimality_structure, my_dual, my_primal
from .selftest import run_selftest

__all__ = ["main"]

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3


def _emit(data: dict, args) -> None:
    if getattr(args, "format", "json") == "csv":
        lines = []
        for key, value in data.items():
            if isinstance(value, (list, tuple)):
                value = " ".join(repr(v) for v in value)
            lines.append(f"{key},{value}")
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not serializable: {type(obj)!r}")


def _load_vector(text_or_path):
    """A JSON list given inline, or a path to a measure file."""
    try:
        data = json.loads(text_or_path)
    except (json.JSONDecodeError, TypeError):
        _, measure = load_measure(text_or_path)
        return measure.weights
    if not isinstance(data, list):
        raise InputError("expected a JSON list of numbers")
    return np.asarray(data, dtype=float)


def _shared_space(args):
    space_mu, mu = load_measure(args.mu)
    space_nu, nu = load_measure(args.nu)
    if space_mu.n != space_nu.n or not np.allclose(
        space_mu.dist, space_nu.dist, atol=1e-12
    ):
        raise InputError("mu and nu must live on the same metric space")
    return space_mu, mu, nu


def _ascent_config(args) -> AscentConfig:
    return AscentConfig(
        learning_rate=args.lr,
        iterations=args.iters,
        seed=args.seed,
        polish=True,
    )


def cmd_divergence(args) -> int:
    spec = get_spec(args.phi)
    _, mu, nu = _shared_space(args)
    exact = exact_divergence(spec, mu, nu)
    if spec.is_trivial:
        out = {"exact": exact, "estimate": None, "gap": None}
    else:
        result = estimate_divergence(spec, mu.weights, nu.weights, _ascent_config(args))
        out = {
            "exact": exact,
            "estimate": result.estimate,
            "gap": abs(exact - result.estimate) if math.isfinite(exact) else None,
        }
    _emit(out, args)
    return EXIT_OK


def cmd_conjugate(args) -> int:
    spec = get_spec(args.phi)
    f = _load_vector(args.f)
    nu = _load_vector(args.nu)
    cfg = SolverConfig(tol=args.tol)
    value, grad, sol = conjugate_value_and_gradient(spec, f, nu, cfg)
    out = {
        "gamma": None if sol is None else sol.gamma + float(np.max(f)),
        "value": value,
        "grad": grad.tolist(),
        "method": "exact" if sol is None else sol.method,
        "iterations": None if sol is None else sol.iterations,
        "residual": None if sol is None else sol.residual,
    }
    if spec.name == "kl":
        newton = solve_gamma(spec, f - np.max(f), nu, cfg, method="newton")
        closed = solve_gamma(spec, f - np.max(f), nu, cfg, method="closed_form")
        out["closed_form_newton_gamma_diff"] = abs(newton.gamma - closed.gamma)
    _emit(out, args)
    return EXIT_OK


def cmd_my(args) -> int:
    spec = get_spec(args.phi)
    space, mu, nu = _shared_space(args)
    params = MYParams(alpha=args.alpha, lam=args.lam, beta=args.beta)
    cfg = MYConfig(
        tol=args.tol,
        dual_lr=args.lr,
        dual_iters=args.iters,
        seed=args.seed,
        polish=True,
        polish_maxiter=2000,
    )
    primal = my_primal(spec, space, mu, nu, params, cfg)
    dual = my_dual(spec, space, mu, nu, params, cfg)
    out = {
        "primal": primal.to_dict(),
        "dual": dual.to_dict(),
        "gap": abs(primal.value - dual.value)
        if math.isfinite(primal.value) and math.isfinite(dual.value)
        else None,
    }
    if (
        primal.xi_star is not None
        and dual.f_star is not None
        and primal.converged
        and dual.converged
    ):
        report = check_optimality_structure(spec, space, mu, nu, params, primal, dual)
        out["structure"] = report.to_dict()
    _emit(out, args)
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = run_selftest(args.filter)
    if not results:
        raise InputError(f"no checks match filter {args.filter!r}")
    for r in results:
        verdict = "PASS" if r.ok else "FAIL"
        print(f"[{verdict}] {r.name} ({r.duration:.1f}s): {r.details}")
    summary = {
        "checks": [r.to_dict() for r in results],
        "passed": sum(r.ok for r in results),
        "failed": sum(not r.ok for r in results),
    }
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        print(json.dumps({"passed": summary["passed"], "failed": summary["failed"]}))
    return EXIT_OK if summary["failed"] == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="myfdiv",
        description="f-divergence conjugates, Moreau-Yosida approximation and "
        "variational estimation on finite spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, phi=True, measures=True):
        if phi:
            p.add_argument("--phi", required=True, help="generator name")
        if measures:
            p.add_argument("--mu", required=True, help="measure file (JSON)")
            p.add_argument("--nu", required=True, help="measure file (JSON)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol", type=float, default=1e-12)
        p.add_argument("--iters", type=int, default=200)
        p.add_argument("--lr", type=float, default=0.1)

    p = sub.add_parser("divergence", help="exact value vs variational estimate")
    common(p)
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("conjugate", help="tight conjugate at a potential")
    p.add_argument("--f", required=True, help="potential: JSON list or measure file")
    p.add_argument("--nu", required=True, help="reference: JSON list or measure file")
    common(p, measures=False)
    p.set_defaults(func=cmd_conjugate)

    p = sub.add_parser("my", help="Moreau-Yosida primal and dual values")
    common(p)
    p.add_argument("--alpha", type=float, required=True, help="order (inf allowed)")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--beta", type=float, default=None, help="ball radius for alpha=inf")
    p.set_defaults(func=cmd_my)

    p = sub.add_parser("selftest", help="run the validation suite")
    p.add_argument("--filter", default=None, help="substring filter on check names")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FileNotFoundError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver error: {exc} {exc.diagnostics}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
