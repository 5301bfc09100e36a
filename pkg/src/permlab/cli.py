"""Command-line front door: matrix JSON in, JSON/CSV out.

Exit status: 0 success, 1 usage error, 2 guard/validation error,
3 solver did not converge.  Every error path emits a machine-readable
{"error": {"code": ..., "message": ...}} envelope on stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import bounds as bounds_mod
from . import coefficients as coeff_mod
from . import degree_m as degree_mod
from . import free_energy as fe_mod
from .core import FlowMatrix, matrix_from_json_obj
from .errors import InputFormat, PermlabError
from .permanent import perm_exact

_EXIT_USAGE = 1
_EXIT_VALIDATION = 2
_EXIT_NO_CONVERGENCE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def _read_matrix(args):
    if args.input:
        try:
            with open(args.input, "r", encoding="utf-8") as fh:
                raw = fh.read()
        except OSError as exc:
            raise InputFormat(f"cannot read {args.input}: {exc}") from exc
    else:
        raw = sys.stdin.read()
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise InputFormat(f"input is not valid JSON: {exc}") from exc
    return matrix_from_json_obj(obj)


def _read_flow(args) -> FlowMatrix:
    gamma = _read_matrix(args)
    if args.M is None:
        raise _UsageError("this command requires --M")
    return FlowMatrix.from_gamma(gamma, args.M)


def _write(args, text: str) -> None:
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_obj(report: fe_mod.MinimizationReport) -> dict:
    return {
        "objective": report.objective,
        "value": report.value,
        "iterations": report.iterations,
        "gap_or_residual": report.gap_or_residual,
        "converged": report.converged,
        "minimizer": [list(row) for row in report.minimizer.entries],
    }


def _cmd_perm(args) -> tuple[str, int]:
    theta = _read_matrix(args)
    return _dumps({"perm": str(perm_exact(theta))}), 0


def _cmd_bethe(args) -> tuple[str, int]:
    theta = _read_matrix(args)
    report = fe_mod.minimize_bethe(theta, tol=args.tol, max_iter=args.max_iter)
    status = 0 if report.converged else _EXIT_NO_CONVERGENCE
    if not report.converged:
        body = {
            "error": {"code": "NoConvergence", "message": "duality gap above tol"},
            "report": _report_obj(report),
        }
        return _dumps(body), status
    return _dumps(_report_obj(report)), status


def _cmd_sinkhorn(args) -> tuple[str, int]:
    theta = _read_matrix(args)
    report = fe_mod.minimize_scaled_sinkhorn(theta, tol=args.tol, max_iter=args.max_iter)
    status = 0 if report.converged else _EXIT_NO_CONVERGENCE
    if not report.converged:
        body = {
            "error": {"code": "NoConvergence", "message": "residual above tol"},
            "report": _report_obj(report),
        }
        return _dumps(body), status
    body = _report_obj(report)
    body["value_unscaled"] = fe_mod.sinkhorn_permanent_unscaled(report)
    return _dumps(body), status


def _exact_or_float(value) -> str | float:
    return str(value) if isinstance(value, Fraction) else value


def _cmd_degree_m(args) -> tuple[str, int]:
    theta = _read_matrix(args)
    if args.M is None:
        raise _UsageError("degree-m requires --M")
    if args.kind == "bethe":
        route = args.route or "coefficients"
        if route not in ("coefficients", "enumerate", "sample"):
            raise _UsageError(f"route {route!r} is not valid for --kind bethe")
        result = degree_mod.degree_m_bethe(
            theta, args.M, route=route, samples=args.samples, seed=args.seed
        )
    else:
        route = args.route or "kronecker"
        if route not in ("kronecker", "coefficients"):
            raise _UsageError(f"route {route!r} is not valid for --kind sinkhorn")
        result = degree_mod.degree_m_sinkhorn(theta, args.M, route=route)
    body = {
        "kind": args.kind,
        "route": route,
        "M": args.M,
        "value_to_the_M": _exact_or_float(result.value_to_the_M),
        "value": result.value,
    }
    return _dumps(body), 0


def _cmd_coeffs(args) -> tuple[str, int]:
    T = _read_flow(args)
    triple = coeff_mod.coefficient_triple(T)
    body = {
        "M": T.M,
        "c_gibbs": str(triple.c_gibbs),
        "c_bethe": str(triple.c_bethe),
        "c_sinkhorn": str(triple.c_sinkhorn),
    }
    return _dumps(body), 0


def _cmd_recursion_check(args) -> tuple[str, int]:
    T = _read_flow(args)
    check = coeff_mod.verify_recursion(args.kind, T)
    body = {
        "kind": check.kind,
        "lhs": str(check.lhs),
        "rhs": str(check.rhs),
        "holds": check.holds,
    }
    return _dumps(body), 0


def _cmd_bounds(args) -> tuple[str, int]:
    if args.input:
        theta = _read_matrix(args)
        if args.M is None:
            raise _UsageError("bounds requires --M")
        report = bounds_mod.check_permanent_bounds(theta, args.M)
        return _dumps(report.to_json_obj()), 0
    if args.n is None or args.M is None:
        raise _UsageError("bounds requires --input (permanent bounds) or --n and --M (coefficient sweep)")
    results = bounds_mod.check_coefficient_bounds(args.n, args.M)
    body = {
        "n": args.n,
        "M": args.M,
        "count": len(results),
        "all_hold": all(ok for _, ok in results),
        "violations": [
            [list(row) for row in T.counts] for T, ok in results if not ok
        ],
    }
    return _dumps(body), 0


def _cmd_m2(args) -> tuple[str, int]:
    theta = _read_matrix(args)
    result = bounds_mod.m2_ratio(theta)
    body = {
        "ratio": result.ratio,
        "via_cycles": result.via_cycles,
        "bounds_ok": result.bounds_ok,
    }
    return _dumps(body), 0


def _cmd_pascal(args) -> tuple[str, int]:
    if args.format == "csv":
        return coeff_mod.pascal_table_csv(args.kind, args.max_m), 0
    rows = coeff_mod.pascal_table(args.kind, args.max_m)
    body = {
        "kind": args.kind,
        "rows": [{"M": M, "k1": k1, "value": str(v)} for M, k1, v in rows],
    }
    return _dumps(body), 0


def _cmd_entropy(args) -> tuple[str, int]:
    T = _read_flow(args)
    values = fe_mod.entropy_values(T)
    body = {
        "h_gibbs_mod": values.h_gibbs_mod,
        "h_bethe": values.h_bethe,
        "h_sinkhorn": values.h_sinkhorn,
    }
    return _dumps(body), 0


def _add_io(sub, needs_input=True):
    if needs_input:
        sub.add_argument("--input", help="matrix JSON file (default: stdin)")
    sub.add_argument("--output", help="write result here instead of stdout")


def build_parser() -> _Parser:
    parser = _Parser(prog="permlab", description=__doc__)
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("perm", help="exact permanent")
    _add_io(p)
    p.set_defaults(func=_cmd_perm)

    p = commands.add_parser("bethe", help="Bethe permanent via Frank-Wolfe")
    _add_io(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=100000, dest="max_iter")
    p.set_defaults(func=_cmd_bethe)

    p = commands.add_parser("sinkhorn", help="scaled Sinkhorn permanent via matrix scaling")
    _add_io(p)
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=100000, dest="max_iter")
    p.set_defaults(func=_cmd_sinkhorn)

    p = commands.add_parser("degree-m", help="degree-M Bethe / scaled Sinkhorn permanent")
    _add_io(p)
    p.add_argument("--M", type=int)
    p.add_argument("--kind", choices=["bethe", "sinkhorn"], default="bethe")
    p.add_argument("--route", choices=["coefficients", "enumerate", "sample", "kronecker"])
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_degree_m)

    p = commands.add_parser("coeffs", help="coefficient triple of a gamma in Gamma_{M,n}")
    _add_io(p)
    p.add_argument("--M", type=int)
    p.set_defaults(func=_cmd_coeffs)

    p = commands.add_parser("recursion-check", help="verify one coefficient recursion")
    _add_io(p)
    p.add_argument("--M", type=int)
    p.add_argument("--kind", choices=["gibbs", "bethe", "sinkhorn"], required=True)
    p.set_defaults(func=_cmd_recursion_check)

    p = commands.add_parser("bounds", help="permanent bound report or coefficient sweep")
    _add_io(p)
    p.add_argument("--M", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=_cmd_bounds)

    p = commands.add_parser("m2", help="degree-2 ratio, direct and via cycle counts")
    _add_io(p)
    p.set_defaults(func=_cmd_m2)

    p = commands.add_parser("pascal", help="n = 2 coefficient table")
    _add_io(p, needs_input=False)
    p.add_argument("--kind", choices=["gibbs", "bethe", "sinkhorn"], required=True)
    p.add_argument("--max-m", type=int, required=True, dest="max_m")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=_cmd_pascal)

    p = commands.add_parser("entropy", help="the three entropy values of a gamma")
    _add_io(p)
    p.add_argument("--M", type=int)
    p.set_defaults(func=_cmd_entropy)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(str(exc) + "\n")
        return _EXIT_USAGE
    try:
        text, status = args.func(args)
    except _UsageError as exc:
        sys.stderr.write(str(exc) + "\n")
        return _EXIT_USAGE
    except PermlabError as exc:
        sys.stdout.write(_dumps({"error": {"code": exc.code, "message": str(exc)}}))
        return _EXIT_VALIDATION
    _write(args, text)
    return status


if __name__ == "__main__":
    sys.exit(main())
