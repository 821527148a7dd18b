"""Command line front end.

    bltab solve --k "[1/2,3/4] u {1}" "1 -> p & r" "D r -> p \\/ q"

Exit status: 0 sat, 1 unsat, 2 unknown, 64 usage or parse error,
70 internal error (a model that failed re-verification).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

from .degrees import consistency_degree, strong_r_sat, weak_r_sat
from .formula import FormulaSyntaxError, parse_formula
from .kset import Interval, KSet, KSetSyntaxError, parse_kset
from .model import verify_model
from .solver import SolverConfig
from .tableau import ExploreConfig, Satisfiable, Unsatisfiable, Unknown, explore

EXIT_SAT, EXIT_UNSAT, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_INTERNAL = 64, 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bltab", description="K-satisfiability for BL with delta and ~.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = sub.add_parser("solve", help="decide satisfiability and print a model")
    p.add_argument("formulas", nargs="*", help="formulas, one per argument")
    p.add_argument("--file", help="file with one formula per line ('#' starts a comment)")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--k", help='truth-value set, e.g. "[1/2,3/4] u {1}"')
    mode.add_argument("--weak", metavar="R", help="weak r-satisfiability: K = [r,1]")
    mode.add_argument("--strong", metavar="R", help="strong r-satisfiability: K = {r}")
    mode.add_argument("--degree", choices=("weak", "strong"), help="bracket the consistency degree")
    p.add_argument("--tol", help="bracket width for --degree")
    p.add_argument("--backend", choices=("smt", "grid"), default=None,
                   help="constraint backend (default: smt when a solver is installed, else grid)")
    p.add_argument("--smt-cmd", help="SMT solver command (default: $BLTAB_SMT_CMD or z3)")
    p.add_argument("--timeout", type=float, default=10.0, help="per-query solver timeout, seconds")
    p.add_argument("--grid-denominator", type=int, default=4)
    p.add_argument("--max-nodes", type=int, default=50_000, help="tableau node budget")
    p.add_argument("--prune", action=argparse.BooleanOptionalAction, default=True,
                   help="check interior nodes and cut closed subtrees (default: on)")
    p.add_argument("--trace", help="write one JSON line per tableau edge to this file")
    p.add_argument("--format", choices=("json", "human"), default="json")
    return parser


def _read_formulas(args) -> list:
    texts = list(args.formulas)
    if args.file:
        with open(args.file, encoding="utf-8") as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    texts.append(line)
    return [parse_formula(t) for t in texts]


def _rational(text: str, what: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"{what} must be a rational number, got {text!r}") from None


def _verdict_name(v) -> str:
    if isinstance(v, Satisfiable):
        return "sat"
    if isinstance(v, Unsatisfiable):
        return "unsat"
    return "unknown"


def run(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        psis = _read_formulas(args)
        if args.degree:
            if args.tol is None:
                raise UsageError("--degree needs --tol")
            tol = _rational(args.tol, "--tol")
            if tol <= 0:
                raise UsageError("--tol must be positive")
        elif args.weak is None and args.strong is None and args.k is None:
            raise UsageError("one of --k, --weak, --strong or --degree is required")
        k = parse_kset(args.k) if args.k is not None else None
        r = None
        for flag in ("weak", "strong"):
            if getattr(args, flag) is not None:
                r = _rational(getattr(args, flag), f"--{flag}")
                if not 0 <= r <= 1:
                    raise UsageError(f"--{flag} must lie in [0,1]")
                k = KSet((Interval(r, Fraction(1) if flag == "weak" else r),))
        if args.grid_denominator < 1:
            raise UsageError("--grid-denominator must be at least 1")
    except (FormulaSyntaxError, KSetSyntaxError, UsageError, OSError) as exc:
        print(f"bltab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    trace_fh = open(args.trace, "w", encoding="utf-8") if args.trace else None

    def on_edge(edge):
        trace_fh.write(json.dumps(edge.as_record(), ensure_ascii=False) + "\n")

    solver = SolverConfig(backend=args.backend or "auto", smt_cmd=args.smt_cmd,
                          timeout=args.timeout, grid_denominator=args.grid_denominator)
    config = ExploreConfig(solver=solver, prune=args.prune, max_nodes=args.max_nodes,
                           on_edge=on_edge if trace_fh else None)
    try:
        if args.degree:
            bracket = consistency_degree(psis, args.degree, tol, config)
            result = {"verdict": "sat" if bracket.complete else "unknown",
                      "degree": bracket.as_record(), "stats": {"probes": bracket.steps}}
            code = EXIT_SAT if bracket.complete else EXIT_UNKNOWN
        else:
            if args.weak is not None:
                verdict = weak_r_sat(psis, r, config)
            elif args.strong is not None:
                verdict = strong_r_sat(psis, r, config)
            else:
                verdict = explore(psis, k, config)
            result, code = _report(psis, k, verdict)
    finally:
        if trace_fh:
            trace_fh.close()
    if args.format == "json":
        out.write(json.dumps(result, sort_keys=False) + "\n")
    else:
        out.write(_human(result) + "\n")
    return code


def _report(psis, k, verdict):
    result = {"verdict": _verdict_name(verdict), "model": None,
              "stats": verdict.stats.as_dict()}
    if isinstance(verdict, Satisfiable):
        if not verify_model(psis, k, verdict.model):
            print("bltab: internal error: returned model failed re-verification", file=sys.stderr)
            return result, EXIT_INTERNAL
        result["model"] = verdict.model.as_record()
        return result, EXIT_SAT
    if isinstance(verdict, Unknown):
        result["diagnostics"] = list(verdict.reasons)
        return result, EXIT_UNKNOWN
    return result, EXIT_UNSAT


def _human(result: dict) -> str:
    lines = [f"verdict: {result['verdict']}"]
    if "degree" in result:
        d = result["degree"]
        lines.append(f"{d['mode']} consistency degree in [{d['lo']}, {d['hi']}]"
                     + ("" if d["complete"] else " (search stopped early)"))
    model = result.get("model")
    if model:
        comps = ", ".join(f"{c['kind']}[{c['lo']},{c['hi']}]" for c in model["components"]) or "minimum"
        lines.append(f"t-norm: {comps}")
        lines.append("valuation: " + ", ".join(f"{a}={v}" for a, v in model["valuation"].items()))
    for reason in result.get("diagnostics", []):
        lines.append(f"  {reason}")
    if "stats" in result:
        lines.append("stats: " + ", ".join(f"{k}={v}" for k, v in result["stats"].items()))
    return "\n".join(lines)


def main(argv: list[str] | None = None):
    logging.basicConfig(level=logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
