"""Batch front-end: analyze instance files, generate seeded instances,
and run the verification suites.

Exit codes for `analyze`: 0 = analysis completed, 2 = a precondition
failed and the dependent report sections were skipped, 1 = I/O or parse
error.  `verify` exits 0 only when every suite passes.  JSON output is
the machine contract; stdout text is a human summary.  Reports embed the
tolerance policy, horizons, and budget, so every verdict is reproducible.
"""

from __future__ import annotations

import argparse
import math
import sys
import warnings

import numpy as np

from . import __version__
from .errors import InvalidParams, ParseError, ShapeError, WoldkitError
from .generate import generate_named
from .growth import check_growth, gamma, gamma_at_least_one
from .linalg import DEFAULT_POLICY, RankWarning, TolerancePolicy
from .model import (
    Representation,
    budget_horizon,
    canonical_json,
    check_covariance,
    parse_json_file,
    representation_from_dict,
    save_representation,
    size_budget,
)
from .shifts import save_shift_spec, shift_pipeline, shift_spec_from_dict
from .structure import default_horizon, is_regular
from .verify import SUITES, run_suite
from .wold import wold_diagnostics

__all__ = ["main"]


def _jsonable(obj):
    """Strip numpy scalar types and non-finite floats for JSON output."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else None
    return obj


def _policy_from_args(args) -> TolerancePolicy:
    return TolerancePolicy(
        tau_rank=args.tol_rank,
        tau_orth=args.tol_orth,
        tau_psd=args.tol_psd,
        tau_sub=args.tol_sub,
    )


def _analyze_representation(rep: Representation, pol: TolerancePolicy, horizon: int | None):
    report: dict = {}
    exit_code = 0
    if horizon is None:
        horizon = default_horizon(rep, pol)
    report["horizon"] = horizon

    if rep.sigma:
        holds, residuals = check_covariance(rep)
        report["covariance"] = {"holds": holds, "residuals": residuals}
    else:
        report["covariance"] = {"holds": True, "residuals": {}, "note": "no generators listed"}

    reg = is_regular(rep, pol, horizon)
    g = gamma(rep, pol)
    report["regularity"] = {
        "strict": reg.strict,
        "at_horizon": reg.holds_at_horizon,
        "per_m": {str(m): v for m, v in reg.per_m.items()},
        "stabilization": reg.stabilization,
        "kernel_dim": reg.kernel_dim,
        "anomaly": reg.anomaly,
    }
    report["gamma"] = {"value": None if math.isinf(g) else g, "at_least_one": gamma_at_least_one(rep, pol)}

    if not gamma_at_least_one(rep, pol):
        reason = "reduced minimum modulus below one"
        report["growth"] = {"skipped": reason}
        report["wold"] = {"skipped": reason}
        return report, 2

    growth = check_growth(rep, None, min(horizon, budget_horizon(rep), 6), pol=pol)
    report["growth"] = growth.as_dict()
    if not reg.holds_at_horizon:
        report["wold"] = {"skipped": f"regularity fails up to horizon {horizon}"}
        exit_code = 2
    elif not growth.all_feasible:
        report["wold"] = {"skipped": "growth condition infeasible at some level"}
        exit_code = 2
    else:
        result = wold_diagnostics(rep, horizon, pol, regularity=reg,
                                  growth_feasible=growth.all_feasible)
        report["wold"] = result.as_dict()
    return report, exit_code


def _print_analysis_summary(report: dict) -> None:
    inp = report["input"]
    print(f"woldkit {report['tool']['version']} analysis of {inp['path']} ({inp['kind']})")
    if inp["kind"] == "representation":
        print(f"  dims: E={inp['dim_E']} H={inp['dim_H']}  horizon={report['horizon']}")
        g = report["gamma"]["value"]
        print(f"  gamma: {'inf' if g is None else f'{g:.6g}'}  "
              f"(at least one: {report['gamma']['at_least_one']})")
        r = report["regularity"]
        print(f"  regular: strict={r['strict']} at_horizon={r['at_horizon']}")
        growth = report["growth"]
        if "skipped" in growth:
            print(f"  growth: skipped ({growth['skipped']})")
        else:
            parts = []
            for entry in growth["per_m"]:
                minimal = entry["minimal_d"]
                shown = "inf" if minimal is None else f"{minimal:.4g}"
                parts.append(f"d_{entry['m']}={shown}")
            print(f"  growth minimal weights: {', '.join(parts)}")
        wold = report["wold"]
        if "skipped" in wold:
            print(f"  wold: skipped ({wold['skipped']})")
        else:
            dims = wold["dims"]
            print(f"  wold dims: W={dims['W']} bracketW={dims['bracketW']} Rinf={dims['Rinf']}")
            flags = ", ".join(k for k, v in sorted(wold["flags"].items()) if v)
            print(f"  wold flags true: {flags}")
    else:
        pipe = report["pipeline"]
        print(f"  gamma: {pipe['gamma']}")
        print(f"  regularity: strict={pipe['regularity']['strict']} "
              f"boundary={pipe['regularity']['boundary_aware']} (label: boundary)")
        dims = pipe["wold"]["dims"]
        print(f"  wold dims: W={dims['W']} bracketW={dims['bracketW']} Rinf={dims['Rinf']}")
        print(f"  assertions: " + ", ".join(f"{k}={v}" for k, v in sorted(pipe["assertions"].items())))
    if report["warnings"]:
        for w in report["warnings"]:
            print(f"  warning: {w}")


def cmd_analyze(args) -> int:
    pol = _policy_from_args(args)
    try:
        data = parse_json_file(args.input)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report: dict = {
        "tool": {"name": "woldkit", "version": __version__},
        "tolerances": pol.as_dict(),
        "budget": size_budget(),
    }
    caught: list[str] = []
    try:
        with warnings.catch_warnings(record=True) as records:
            warnings.simplefilter("always", RankWarning)
            if "kind" in data:
                spec = shift_spec_from_dict(data, source=str(args.input))
                pipe = shift_pipeline(spec, pol)
                report["input"] = {"path": str(args.input), "kind": pipe.kind}
                report["pipeline"] = pipe.as_dict()
                exit_code = 0
            else:
                rep = representation_from_dict(data, source=str(args.input))
                report["input"] = {
                    "path": str(args.input),
                    "kind": "representation",
                    "dim_E": rep.dim_e,
                    "dim_H": rep.dim_h,
                }
                body, exit_code = _analyze_representation(rep, pol, args.horizon)
                report.update(body)
            caught = sorted({str(r.message) for r in records if issubclass(r.category, RankWarning)})
    except (ParseError, ShapeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    report["warnings"] = caught
    payload = canonical_json(_jsonable(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload)
    _print_analysis_summary(_jsonable(report))
    return exit_code


def cmd_generate(args) -> int:
    params: dict[str, str] = {}
    for item in args.params or []:
        if "=" not in item:
            print(f"error: parameter {item!r} is not key=value", file=sys.stderr)
            return 1
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    try:
        obj = generate_named(args.kind, args.seed, params)
    except InvalidParams as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if isinstance(obj, Representation):
        save_representation(obj, args.out)
    else:
        save_shift_spec(obj, args.out)
    print(f"wrote {args.kind} instance (seed {args.seed}) to {args.out}")
    return 0


def cmd_verify(args) -> int:
    pol = _policy_from_args(args)
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        print(
            f"error: unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}",
            file=sys.stderr,
        )
        return 1
    all_ok = True
    for name in names:
        result = run_suite(name, args.count, args.seed, pol)
        status = "PASS" if result.ok else "FAIL"
        line = (
            f"{status} {result.name}: {result.passed}/{result.total} passed"
            + (f", {result.skipped} skipped" if result.skipped else "")
        )
        print(line)
        for failure in result.failures:
            print(f"  failure[{failure['index']}]: {failure['message']}")
            if failure["instance"]:
                print(f"  instance: {failure['instance']}")
        all_ok = all_ok and result.ok
    return 0 if all_ok else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="woldkit",
        description="Analyze covariant-representation matrices and weighted shifts.",
    )
    parser.add_argument("--version", action="version", version=f"woldkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_tolerances(p):
        p.add_argument("--tol-rank", type=float, default=DEFAULT_POLICY.tau_rank)
        p.add_argument("--tol-orth", type=float, default=DEFAULT_POLICY.tau_orth)
        p.add_argument("--tol-psd", type=float, default=DEFAULT_POLICY.tau_psd)
        p.add_argument("--tol-sub", type=float, default=DEFAULT_POLICY.tau_sub)

    p_an = sub.add_parser("analyze", help="analyze a representation or shift-spec file")
    p_an.add_argument("input")
    p_an.add_argument("--out", help="write the JSON report here")
    p_an.add_argument("--horizon", type=int, default=None)
    add_tolerances(p_an)
    p_an.set_defaults(func=cmd_analyze)

    p_gen = sub.add_parser("generate", help="write a seeded instance file")
    p_gen.add_argument("kind")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument("--params", nargs="*", metavar="key=value")
    p_gen.set_defaults(func=cmd_generate)

    p_ver = sub.add_parser("verify", help="run seeded verification suites")
    p_ver.add_argument("suite", help="'all' or one suite name")
    p_ver.add_argument("--count", type=int, default=25)
    p_ver.add_argument("--seed", type=int, default=1)
    add_tolerances(p_ver)
    p_ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except WoldkitError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
