"""Command-line front end.

Exactly one JSON document goes to stdout; a short human summary goes to
stderr.  Exit codes: 0 holds/certified/no violations, 1 violated/refuted,
2 hypotheses unmet/inconclusive, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from hadamard import bounds, verify
from hadamard.bounds import Settings
from hadamard.convexity import KINDS, ClassSpec, certify
from hadamard.expr import Binary, Call, Constant, ExprError, Number, Unary, Variable, evaluate, parse, pretty
from hadamard.quad import Interval

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_UNMET = 2
EXIT_USAGE = 64

DSL_HELP = (
    "expressions use x, numbers, + - * / ^, parentheses, exp/log/sqrt/abs and the constants e, pi; "
    "'^' is right-associative and binds tighter than unary minus (-x^2 means -(x^2))"
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _grid(text: str) -> tuple[int, int]:
    try:
        n_xy, n_t = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like NXY,NT, got {text!r}") from None
    if n_xy < 2 or n_t < 2:
        raise argparse.ArgumentTypeError("grid sizes must be at least 2")
    return n_xy, n_t


def _add_tolerances(p: argparse.ArgumentParser) -> None:
    p.add_argument("--quad-tol", type=float, default=1e-10, help="quadrature relative tolerance (default 1e-10)")
    p.add_argument("--certify-tol", type=float, default=1e-9, help="certificate slack tolerance (default 1e-9)")
    p.add_argument("--verify-tol", type=float, default=1e-9, help="inequality verification floor (default 1e-9)")
    p.add_argument("--grid", type=_grid, default=(41, 21), help="certification grid NXY,NT (default 41,21)")
    p.add_argument("--opt-grid", type=int, default=257, help="split-point search grid (default 257)")
    p.add_argument("--opt-tol", type=float, default=1e-10, help="golden-section relative width (default 1e-10)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hadamard", description="Numerical checks of Hadamard-type inequalities.", epilog=DSL_HELP)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("parse", help="parse and pretty-print an expression", epilog=DSL_HELP)
    p.add_argument("--f", required=True, help="expression in x")
    p.add_argument("--x", type=float, action="append", default=[], help="evaluate at this point (repeatable)")

    p = sub.add_parser("certify", help="certify class membership on a grid", epilog=DSL_HELP)
    p.add_argument("--class", dest="kind", required=True, choices=KINDS)
    p.add_argument("--m", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--f", required=True)
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    _add_tolerances(p)

    p = sub.add_parser("bound", help="evaluate one bound", epilog=DSL_HELP)
    p.add_argument("--theorem", required=True, choices=bounds.THEOREM_IDS)
    p.add_argument("--f")
    p.add_argument("--g")
    p.add_argument("--fi", action="append", default=[], help="product factor (repeatable)")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--m1", type=float)
    p.add_argument("--m2", type=float)
    p.add_argument("--alpha1", type=float)
    p.add_argument("--alpha2", type=float)
    p.add_argument("--concave", action="store_true", help="log-concave variant (gill, thm21_product, cor1, cor22)")
    _add_tolerances(p)

    p = sub.add_parser("fuzz", help="seeded batch verification of one bound")
    p.add_argument("--theorem", required=True, choices=bounds.THEOREM_IDS)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--family", choices=verify.FAMILIES)
    p.add_argument("--n", type=int, help="number of product factors (default: 1-3 per trial)")
    p.add_argument("--m1", type=float, default=1.0)
    p.add_argument("--m2", type=float, default=1.0)
    p.add_argument("--alpha1", type=float, default=1.0)
    p.add_argument("--alpha2", type=float, default=1.0)
    p.add_argument("--concave", action="store_true")
    p.add_argument("--max-discards", type=int, default=verify.MAX_DISCARDS)
    p.add_argument("--out", type=Path, help="also write the summary JSON here")
    p.add_argument("--csv", type=Path, help="write per-trial margins as CSV")
    _add_tolerances(p)
    return parser


def _settings(args) -> Settings:
    try:
        return Settings(
            quad_tol=args.quad_tol,
            certify_tol=args.certify_tol,
            verify_tol=args.verify_tol,
            grid=tuple(args.grid),
            opt_grid=args.opt_grid,
            opt_tol=args.opt_tol,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _interval(args) -> Interval:
    try:
        return Interval(args.a, args.b)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _expr(text: str, flag: str):
    try:
        return parse(text)
    except ExprError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def ast_to_dict(e) -> dict:
    if isinstance(e, Number):
        return {"node": "Number", "value": e.value}
    if isinstance(e, Variable):
        return {"node": "Variable", "name": e.name}
    if isinstance(e, Constant):
        return {"node": "Constant", "name": e.name}
    if isinstance(e, Unary):
        return {"node": "Unary", "op": e.op, "operand": ast_to_dict(e.operand)}
    if isinstance(e, Binary):
        return {"node": "Binary", "op": e.op, "left": ast_to_dict(e.left), "right": ast_to_dict(e.right)}
    if isinstance(e, Call):
        return {"node": "Call", "name": e.name, "arg": ast_to_dict(e.arg)}
    raise TypeError(e)


def _cmd_parse(args):
    e = _expr(args.f, "--f")
    points = []
    for x in args.x:
        out = evaluate(e, x)
        points.append({"x": x, "value": out.value if out.ok else None, "fault": out.fault})
    doc = {"kind": "parse_result", "source": args.f, "pretty": pretty(e), "ast": ast_to_dict(e), "evaluations": points}
    return doc, EXIT_OK, f"parsed: {pretty(e)}"


def _cmd_certify(args):
    try:
        spec = ClassSpec(args.kind, m=args.m, alpha=args.alpha)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    f = _expr(args.f, "--f")
    iv = _interval(args)
    settings = _settings(args)
    cert = certify(f, spec, iv, settings.grid, settings.certify_tol)
    doc = {"kind": "certificate", "f": pretty(f), **cert.to_dict()}
    code = {"certified": EXIT_OK, "refuted": EXIT_FAIL}.get(cert.verdict, EXIT_UNMET)
    msg = f"{spec.label()} on [{iv.a}, {iv.b}]: {cert.verdict} (worst violation {cert.worst_violation!r})"
    if cert.counterexample:
        msg += f", counterexample (x, y, t) = {cert.counterexample}"
    return doc, code, msg


_NEEDS = {
    "thm22_sandwich": ("g",),
    "thm23_sandwich": ("g",),
    "thm24_mconvex": ("g", "m1", "m2"),
    "thm25_alpham": ("g", "alpha1", "m1", "alpha2", "m2"),
}


def _cmd_bound(args):
    t = args.theorem
    missing = [f"--{name}" for name in _NEEDS.get(t, ()) if getattr(args, name) is None]
    factors = ([args.f] if args.f else []) + list(args.fi)
    if t in ("thm21_product", "cor22"):
        if not factors:
            missing.append("--f or --fi")
    elif args.f is None:
        missing.append("--f")
    if missing:
        raise UsageError(f"--theorem {t} requires {', '.join(missing)}")
    if args.concave and t not in ("gill", "thm21_product", "cor1", "cor22"):
        raise UsageError(f"--concave does not apply to {t}")
    iv = _interval(args)
    settings = _settings(args)
    exprs = [_expr(s, "--fi") for s in factors] if t in ("thm21_product", "cor22") else [_expr(args.f, "--f")]
    if args.g is not None and t in _NEEDS:
        exprs.append(_expr(args.g, "--g"))
    params = {"m1": args.m1, "m2": args.m2, "alpha1": args.alpha1, "alpha2": args.alpha2, "concave": args.concave}
    try:
        report = verify.run_bound(t, exprs, iv, params, settings)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    code = {"holds": EXIT_OK, "violated": EXIT_FAIL}.get(report.verdict, EXIT_UNMET)
    msg = f"{t}: {report.verdict} (margin {report.margin!r}, verify_tol {report.verify_tol!r})"
    return report.to_dict(), code, msg


def _cmd_fuzz(args):
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    try:
        config = verify.FuzzConfig(
            args.theorem, family=args.family, n=args.n, m1=args.m1, m2=args.m2,
            alpha1=args.alpha1, alpha2=args.alpha2, concave=args.concave, max_discards=args.max_discards,
        )
        config.class_specs()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    settings = _settings(args)
    summary = verify.fuzz(config, args.trials, args.seed, settings)
    doc = summary.to_dict()
    if args.out:
        args.out.write_text(_dump(doc))
    if args.csv:
        args.csv.write_text(summary.margins_csv())
    code = EXIT_OK if summary.violations == 0 else EXIT_FAIL
    msg = (
        f"{summary.theorem_id}: {summary.trials} trials, {summary.holds} hold, "
        f"{summary.hypotheses_unmet} hypotheses unmet, {summary.violations} violations, "
        f"{summary.discarded_draws} discarded draws"
    )
    return doc, code, msg


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


COMMANDS = {"parse": _cmd_parse, "certify": _cmd_certify, "bound": _cmd_bound, "fuzz": _cmd_fuzz}


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        doc, code, msg = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    stdout.write(_dump(doc))
    print(msg, file=stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
