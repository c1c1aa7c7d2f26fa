"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 parse error, 3 solver or algorithm failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .algo import AlgoConfig, AlgoError, algo1, algo2, maxcut_maxgap
from .bench.maxcut import gen_maxcut
from .bench.problems import ProblemFile, ProblemSyntaxError, parse_problem, rescale_to_unit_box
from .bench.reports import fmt, maxcut_row, report_maxcut_batch, report_value_function, to_csv
from .bounds import ProjectionError, projection
from .localopt import NoFeasiblePoint
from .relax import InfeasibleFixing, OrderTooSmall, archimedean_evident, box_products, split_constraints

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


class ParseError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def _load(path: str) -> ProblemFile:
    try:
        return parse_problem(_read(path))
    except ProblemSyntaxError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _load_matrix(path: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            rows.append([float(v) for v in line.replace(",", " ").split()])
        except ValueError:
            raise ParseError(f"{path}: line {lineno}: non-numeric entry") from None
    Q = np.array(rows) if rows else np.zeros((0, 0))
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] < 1:
        raise ParseError(f"{path}: matrix must be square")
    if not np.allclose(Q, Q.T):
        raise ParseError(f"{path}: matrix must be symmetric")
    return Q


def _coord(arg: int, n: int) -> int:
    if not 1 <= arg <= n:
        raise UsageError(f"--coord must be in 1..{n}")
    return arg - 1


def _orders(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad order list {text!r}") from None
    if not vals or min(vals) < 1:
        raise UsageError("orders must be positive integers")
    return vals


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    pf = _load(args.file)
    prob = pf.problem
    back = None
    if args.rescale:
        try:
            prob, boxmap = rescale_to_unit_box(prob)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        back = boxmap.back
    cfg = AlgoConfig(order=args.order, refine=args.refine, depth=args.depth)
    if args.algo == "jm1":
        intervals = [projection(prob, k, args.order) for k in range(prob.n)]
        trace = algo1(prob, intervals, cfg)
    else:
        trace = algo2(prob, cfg)

    def original(x):
        return back(x) if back is not None else np.asarray(x)

    x = original(trace.x)
    orig = pf.problem
    f_x = orig.f(x)
    infeas = orig.feasibility_residual(x)
    rows = []
    for st in trace.steps:
        lo, hi = (st.interval.lo, st.interval.hi)
        rows.append(("step", st.coord + 1, lo, hi, st.status, st.value, " ".join(fmt(c) for c in st.coeffs)))
    for k, v in enumerate(x):
        rows.append(("x", k + 1, "", "", "", v, ""))
    rows.append(("f", "", "", "", "", f_x, ""))
    rows.append(("infeasibility", "", "", "", "", infeas, ""))
    print(trace.report())
    if back is not None:
        print("x (original coordinates) = " + " ".join(fmt(v) for v in x))
    best = f_x
    if trace.refined is not None:
        xr = original(trace.refined.x)
        fr = orig.f(xr)
        for k, v in enumerate(xr):
            rows.append(("x_refined", k + 1, "", "", "", v, ""))
        rows.append(("f_refined", "", "", "", "", fr, ""))
        rows.append(("infeasibility_refined", "", "", "", "", orig.feasibility_residual(xr), ""))
        rows.append(("converged", "", "", "", "", bool(trace.refined.converged), ""))
        best = fr
    if pf.optimum is not None:
        rel = abs(best - pf.optimum) / max(abs(pf.optimum), 1e-12)
        rows.append(("optimum", "", "", "", "", pf.optimum, ""))
        rows.append(("rel_error", "", "", "", "", rel, ""))
        print(f"rel. error {100 * rel:.2f}%  (f*={fmt(pf.optimum)}, obtained {fmt(best)})")
    _emit(to_csv(rows, ["record", "coord", "lo", "hi", "status", "value", "coefficients"]), args.out)
    return EXIT_OK


def cmd_value_function(args) -> int:
    pf = _load(args.file)
    prob = pf.problem
    k = _coord(args.coord, prob.n)
    iv = projection(prob, k, 1)
    rows = report_value_function(prob, k, iv, _orders(args.orders), args.grid)
    text = to_csv(rows)
    print(f"coordinate {k + 1} on {iv}")
    print(text, end="")
    _emit(text, args.out)
    return EXIT_OK


def cmd_maxcut(args) -> int:
    if args.file:
        Q = _load_matrix(args.file)
        row = maxcut_row(Q, 0, 0, args.order, brute=not args.no_brute)
        rows = [row]
        print(f"cost {fmt(row.maxgap)}  signs {row.signs}  shor {fmt(row.shor)}")
        if not math.isnan(row.optimum):
            print(f"optimum {fmt(row.optimum)}")
    else:
        if args.nodes is None:
            raise UsageError("maxcut needs --file or --nodes")
        summary = report_maxcut_batch(args.nodes, args.count, args.density, args.seed, args.order, args.jobs)
        rows = summary.rows
        for r in rows:
            print(f"instance {r.instance} seed {r.seed}: cost {fmt(r.maxgap)} shor {fmt(r.shor)} optimum {fmt(r.optimum)}")
        print(summary.text())
    _emit(to_csv(rows), args.out)
    return EXIT_OK


def cmd_project(args) -> int:
    pf = _load(args.file)
    prob = pf.problem
    k = _coord(args.coord, prob.n)
    iv = projection(prob, k, args.order)
    print(f"x{k + 1} in {iv}")
    _emit(to_csv([(k + 1, iv.lo, iv.hi)], ["coord", "lo", "hi"]), args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    pf = _load(args.file)
    prob = pf.problem
    ineq, eq = split_constraints(prob.constraints)
    guard = box_products(prob)
    lines = [
        ("name", pf.name or "-"),
        ("nvars", prob.n),
        ("constraints", prob.m),
        ("equality_pairs", len(eq)),
        ("objective_degree", prob.f.degree),
        ("max_degree", prob.degree),
        ("min_order", prob.min_order()),
        ("polytope", prob.is_polytope()),
        ("full_box", prob.has_full_box()),
        ("compactness_visible", archimedean_evident(prob)),
        ("guard_constraints", len(guard)),
        ("optimum", "-" if pf.optimum is None else pf.optimum),
    ]
    for key, val in lines:
        print(f"{key}: {fmt(val)}")
    uncovered = [j + 1 for j, b in enumerate(prob.inferred_box()) if b is None]
    if uncovered and not archimedean_evident(prob):
        print(f"warning: no bounds for variables {uncovered}; relaxations may not converge")
    _emit(to_csv(lines, ["key", "value"]), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jmopt", description="Joint+marginal relaxations for polynomial optimization.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("solve", help="run ALGO 1 or ALGO 2 on a problem file")
    s.add_argument("--file", required=True)
    s.add_argument("--algo", choices=["jm1", "jm2"], default="jm2")
    s.add_argument("--order", type=int, default=1)
    s.add_argument("--depth", type=int, default=6, help="dichotomy depth for jm1")
    s.add_argument("--refine", action="store_true", help="polish the result with local optimization")
    s.add_argument("--rescale", action="store_true", help="solve on [-1,1]^n, report original coordinates")
    s.add_argument("--out")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("value-function", help="lower-bound quality of the value polynomials")
    s.add_argument("--file", required=True)
    s.add_argument("--coord", type=int, required=True, help="1-based coordinate")
    s.add_argument("--orders", default="1,2,3")
    s.add_argument("--grid", type=int, default=101)
    s.add_argument("--out")
    s.set_defaults(func=cmd_value_function)

    s = sub.add_parser("maxcut", help="max-gap rounding on random graphs or a given matrix")
    s.add_argument("--file", help="whitespace-separated symmetric matrix")
    s.add_argument("--nodes", type=int)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--density", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--order", type=int, default=1)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--no-brute", action="store_true", help="skip the exhaustive optimum")
    s.add_argument("--out")
    s.set_defaults(func=cmd_maxcut)

    s = sub.add_parser("project", help="interval of one coordinate over the feasible set")
    s.add_argument("--file", required=True)
    s.add_argument("--coord", type=int, required=True, help="1-based coordinate")
    s.add_argument("--order", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_project)

    s = sub.add_parser("check", help="parse a problem file and report its structure")
    s.add_argument("--file", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_check)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise UsageError("missing subcommand")
        level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
        logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
        if getattr(args, "order", 1) < 1:
            raise UsageError("--order must be at least 1")
        return args.func(args)
    except UsageError as exc:
        print(f"jmopt: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"jmopt: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (AlgoError, ProjectionError, InfeasibleFixing, NoFeasiblePoint, OrderTooSmall, RuntimeError) as exc:
        print(f"jmopt: failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
