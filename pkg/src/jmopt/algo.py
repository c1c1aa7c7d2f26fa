"""Coordinate-by-coordinate joint+marginal heuristics.

* :func:`algo1` treats every coordinate as the parameter of the original
  problem on a fixed interval and minimizes the resulting value polynomial.
  Infeasible relaxations trigger :func:`dichotomy`.
* :func:`algo2` fixes coordinates one at a time, substituting each chosen
  value and recomputing the next coordinate's interval.
* :func:`maxcut_maxgap` fixes +-1 variables of ``min x'Qx``, always choosing
  the coordinate whose affine value polynomial has the steepest slope.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .bounds import ProjectionError, projection
from .conic import SolverOptions, Status
from .localopt import NoFeasiblePoint, RefineOptions, RefineResult, refine
from .moments import Interval
from .poly import Polynomial
from .relax import (
    InfeasibleFixing,
    RelaxationResult,
    SemialgebraicProblem,
    SignSet,
    solve_parametric,
)
from .univar import minimize_on_interval

logger = logging.getLogger(__name__)


class AlgoError(RuntimeError):
    """An algorithm could not complete; ``step`` is the 0-based coordinate step."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


@dataclass
class AlgoConfig:
    order: int = 1
    tie_tol: float = 1e-9
    depth: int = 6
    min_width: float = 1e-4
    refine: bool = False
    sign_tol: float = 1e-6
    degenerate_width: float = 1e-8
    solver: SolverOptions = field(default_factory=SolverOptions)
    refine_options: RefineOptions = field(default_factory=RefineOptions)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("relaxation order must be at least 1")
        if self.depth < 0:
            raise ValueError("dichotomy depth must be nonnegative")

    def relaxed_solver(self) -> SolverOptions:
        return replace(self.solver, tol=max(self.solver.tol, 1e-6), max_iter=2 * self.solver.max_iter)


@dataclass
class StepRecord:
    coord: int
    interval: Interval | SignSet
    status: str
    coeffs: tuple[float, ...]
    value: float
    path: tuple[Interval, ...] = ()
    note: str = ""

    def line(self) -> str:
        lam = " ".join(f"{c:.10g}" for c in self.coeffs)
        path = " ".join(str(iv) for iv in self.path)
        out = f"k={self.coord + 1} interval={self.interval} status={self.status} lambda=[{lam}] x={self.value:.10g}"
        if path:
            out += f" dichotomy={path}"
        if self.note:
            out += f" note={self.note}"
        return out


@dataclass
class AlgoTrace:
    algo: str
    steps: list[StepRecord]
    x: np.ndarray
    value: float
    feasibility: float
    refined: RefineResult | None = None

    def report(self) -> str:
        lines = [f"# {self.algo}"]
        lines += [s.line() for s in self.steps]
        lines.append("x=" + " ".join(f"{v:.10g}" for v in self.x))
        lines.append(f"f={self.value:.10g} infeasibility={self.feasibility:.3g}")
        if self.refined is not None:
            r = self.refined
            lines.append("x_refined=" + " ".join(f"{v:.10g}" for v in r.x))
            lines.append(f"f_refined={r.value:.10g} infeasibility={r.feasibility:.3g} converged={r.converged}")
        return "\n".join(lines)


@dataclass
class CutVector:
    signs: tuple[int, ...]
    cost: float
    trace: AlgoTrace | None = None

    def __post_init__(self):
        if any(s not in (-1, 1) for s in self.signs):
            raise ValueError("cut entries must be +-1")


# ---------------------------------------------------------------------------
# helpers


def _attempt(prob: SemialgebraicProblem, k: int, iv, cfg: AlgoConfig, degrees=None) -> RelaxationResult:
    """Solve one parametric relaxation, retrying once with a relaxed tolerance."""
    res = solve_parametric(prob, k, iv, cfg.order, cfg.solver, degrees)
    if res.feasible or res.status == Status.INFEASIBLE:
        return res
    logger.info("coordinate %d on %s: %s, retrying with relaxed tolerance", k + 1, iv, res.status)
    return solve_parametric(prob, k, iv, cfg.order, cfg.relaxed_solver(), degrees)


def _finish(algo: str, prob: SemialgebraicProblem, steps, x, cfg: AlgoConfig) -> AlgoTrace:
    x = np.asarray(x, dtype=float)
    trace = AlgoTrace(algo, steps, x, float(prob.f(x)), prob.feasibility_residual(x))
    if cfg.refine:
        try:
            trace.refined = refine(prob, x, cfg.refine_options)
        except NoFeasiblePoint as exc:
            logger.warning("refinement failed: %s", exc)
    return trace


# ---------------------------------------------------------------------------
# ALGO 1


def dichotomy(prob: SemialgebraicProblem, k: int, iv: Interval, cfg: AlgoConfig):
    """First parameter subinterval (depth-first, left half first) with a feasible relaxation.

    ``iv`` itself is tried first.  Returns ``(interval, result, path)``
    where ``path`` lists every interval attempted.
    """
    path: list[Interval] = []
    floor = cfg.min_width * iv.width

    def visit(sub: Interval, depth: int):
        path.append(sub)
        res = _attempt(prob, k, sub, cfg)
        if res.feasible:
            return sub, res
        if depth >= cfg.depth or sub.width / 2 < floor:
            return None
        for half in sub.bisect():
            found = visit(half, depth + 1)
            if found:
                return found
        return None

    found = visit(iv, 0)
    if found is None:
        raise AlgoError(
            f"no feasible parameter subinterval found for x{k + 1} on {iv} after {len(path)} attempts", k
        )
    return found[0], found[1], tuple(path)


def algo1(prob: SemialgebraicProblem, intervals: Sequence[Interval], cfg: AlgoConfig | None = None) -> AlgoTrace:
    """Minimize each coordinate's value polynomial over its fixed interval."""
    cfg = cfg or AlgoConfig()
    if len(intervals) != prob.n:
        raise ValueError("need one interval per variable")
    steps, x = [], []
    for k, iv in enumerate(intervals):
        sub, res, path = dichotomy(prob, k, iv, cfg)
        vp = res.value_poly
        xk = minimize_on_interval(vp, sub, cfg.tie_tol).argmin
        steps.append(StepRecord(k, sub, str(res.status), tuple(vp.coeffs), xk, path if len(path) > 1 else ()))
        x.append(xk)
    return _finish("algo1", prob, steps, x, cfg)


# ---------------------------------------------------------------------------
# ALGO 2


def _slacken(prob: SemialgebraicProblem, eps: float) -> SemialgebraicProblem:
    return replace(prob, constraints=[g + eps for g in prob.constraints])


def _step_interval(current: SemialgebraicProblem, cfg: AlgoConfig, step: int) -> Interval:
    last = None
    for slack in (0.0, 1e-9, 1e-7):
        try:
            if slack and not current.is_polytope():
                return projection(_slacken(current, slack), 0, cfg.order)
            return projection(current, 0, cfg.order, slack=slack)
        except ProjectionError as exc:
            last = exc
    raise AlgoError(f"step {step + 1}: cannot compute the interval of x{step + 1}: {last}", step)


def algo2(prob: SemialgebraicProblem, cfg: AlgoConfig | None = None) -> AlgoTrace:
    """Fix ``x_1, x_2, ...`` in turn on the slice left by the previous choices."""
    cfg = cfg or AlgoConfig()
    steps: list[StepRecord] = []
    prefix: list[float] = []
    for step in range(prob.n):
        try:
            current = prob.fix_prefix(prefix)
        except InfeasibleFixing as exc:
            raise AlgoError(f"step {step + 1}: {exc}; the set may be non-convex, try algo1", step) from exc
        iv = _step_interval(current, cfg, step)
        if iv.width <= cfg.degenerate_width * max(1.0, abs(iv.midpoint)):
            xk = iv.midpoint
            steps.append(StepRecord(step, iv, "degenerate", (), xk))
            prefix.append(xk)
            continue
        res = _attempt(current, 0, iv, cfg)
        note = ""
        if not res.feasible:
            # a face of the set leaves no interior; loosen the constraints slightly
            res = _attempt(_slacken(current, 1e-9 * max(1.0, iv.width)), 0, iv, cfg)
            note = "slackened"
        if not res.feasible:
            raise AlgoError(f"step {step + 1}: relaxation ended with status {res.status}; try algo1", step)
        xk = iv.clamp(minimize_on_interval(res.value_poly, iv, cfg.tie_tol).argmin)
        # outward rounding of the interval may step past an explicit bound
        lo, hi = current.axis_bounds()
        xk = min(max(xk, lo[0]), hi[0])
        steps.append(StepRecord(step, iv, str(res.status), tuple(res.value_poly.coeffs), xk, note=note))
        prefix.append(xk)
    return _finish("algo2", prob, steps, prefix, cfg)


# ---------------------------------------------------------------------------
# MAXCUT


def quadratic_form(Q) -> Polynomial:
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    terms = {}
    for a in range(n):
        for b in range(n):
            if Q[a, b]:
                e = [0] * n
                e[a] += 1
                e[b] += 1
                terms[tuple(e)] = terms.get(tuple(e), 0.0) + Q[a, b]
    return Polynomial(n, terms)


def maxcut_problem(Q) -> SemialgebraicProblem:
    """``min x'Qx`` with ``x_k^2 = 1`` written as two inequalities per coordinate."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("Q must be square")
    if not np.allclose(Q, Q.T):
        raise ValueError("Q must be symmetric")
    n = Q.shape[0]
    cons = []
    for k in range(n):
        sq = Polynomial.variable(n, k) ** 2
        cons += [sq - 1.0, 1.0 - sq]
    box = [Interval(-1.0, 1.0)] * n
    return SemialgebraicProblem(n, quadratic_form(Q), cons, box, "maxcut")


def cut_cost(Q, signs) -> float:
    x = np.asarray(signs, dtype=float)
    return float(x @ np.asarray(Q, dtype=float) @ x)


def maxcut_maxgap(Q, cfg: AlgoConfig | None = None) -> CutVector:
    """Greedy +-1 fixing by largest value-polynomial slope."""
    cfg = cfg or AlgoConfig()
    prob = maxcut_problem(Q)
    n = prob.n
    signs: list[int | None] = [None] * n
    free = list(range(n))
    current = prob
    steps: list[StepRecord] = []
    support = SignSet()
    while free:
        slopes, results = [], []
        for p in range(len(free)):
            res = _attempt(current, p, support, cfg, degrees=(0, 1))
            if not res.feasible:
                raise AlgoError(f"relaxation for x{free[p] + 1} ended with status {res.status}", free[p])
            slopes.append(float(res.value_poly.coeffs[1]))
            results.append(res)
        mags = np.abs(slopes)
        top = float(mags.max())
        pick = int(np.nonzero(mags >= top - cfg.sign_tol * max(1.0, top))[0][0])
        lam1 = slopes[pick]
        sign = -1 if lam1 > cfg.sign_tol else 1
        k = free[pick]
        signs[k] = sign
        res = results[pick]
        steps.append(StepRecord(k, support, str(res.status), tuple(res.value_poly.coeffs), float(sign)))
        current = current.fix(pick, float(sign))
        del free[pick]
    cut = tuple(int(s) for s in signs)
    x = np.array(cut, dtype=float)
    trace = AlgoTrace("maxgap", steps, x, float(prob.f(x)), prob.feasibility_residual(x))
    return CutVector(cut, cut_cost(Q, cut), trace)
