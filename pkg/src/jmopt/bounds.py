"""Projection intervals of a feasible set onto one coordinate axis."""
from __future__ import annotations

from typing import Sequence

import numpy as np

from . import conic
from .conic import ConicProgram, SolverOptions, Status
from .moments import AffineMatrixMap, Interval
from .poly import Polynomial
from .relax import SemialgebraicProblem, build_standard

OUTWARD = 1e-9
#: endpoints need more accuracy than the outward rounding step
PROJECTION_SOLVER = SolverOptions(tol=1e-11, max_iter=300)


class ProjectionError(RuntimeError):
    pass


def _affine_parts(g: Polynomial) -> tuple[np.ndarray, float]:
    if g.degree > 1:
        raise ValueError(f"constraint {g} is not affine")
    a = np.zeros(g.nvars)
    for e, c in g.items():
        if sum(e):
            a[e.index(1)] = c
    return a, g.constant_term()


def polytope_rows(prob: SemialgebraicProblem) -> tuple[np.ndarray, np.ndarray]:
    """``(A, b)`` with the feasible set ``{x : A x + b >= 0}``."""
    rows = [_affine_parts(g) for g in prob.constraints]
    if not rows:
        return np.zeros((0, prob.n)), np.zeros(0)
    return np.array([r[0] for r in rows]), np.array([r[1] for r in rows])


def lp_program(A: np.ndarray, b: np.ndarray, cost: np.ndarray) -> ConicProgram:
    """``min cost'x  s.t.  A x + b >= 0`` as a conic program with 1x1 blocks."""
    blocks = []
    for j, (row, b0) in enumerate(zip(A, b)):
        entries = tuple((0, 0, int(v), float(row[v])) for v in np.nonzero(row)[0])
        blocks.append(AffineMatrixMap(1, entries, constant=np.array([[float(b0)]]), label=f"row{j}"))
    objective = {int(v): float(cost[v]) for v in np.nonzero(cost)[0]}
    return ConicProgram(A.shape[1], objective, [], blocks)


def _finish(lo: float, hi: float, prob: SemialgebraicProblem, k: int) -> Interval:
    lo -= OUTWARD * max(1.0, abs(lo))
    hi += OUTWARD * max(1.0, abs(hi))
    if prob.box is not None and prob.box[k] is not None:
        lo, hi = max(lo, prob.box[k].lo), min(hi, prob.box[k].hi)
    if hi < lo:
        lo = hi = 0.5 * (lo + hi)
    return Interval(lo, hi)


def projection_polytope(
    prob: SemialgebraicProblem, k: int, slack: float = 0.0, opts: SolverOptions | None = None
) -> Interval:
    """Exact ``[min x_k, max x_k]`` over a polytope by two LPs.

    ``slack`` loosens every row to ``a'x + b >= -slack``, which keeps the
    LP strictly feasible when earlier fixings put the set on a face.
    """
    if not prob.is_polytope():
        raise ValueError("projection_polytope needs affine constraints")
    opts = opts or PROJECTION_SOLVER
    A, b = polytope_rows(prob)
    b = b + slack
    ends = []
    for sign in (1.0, -1.0):
        cost = np.zeros(prob.n)
        cost[k] = sign
        sol = conic.solve(lp_program(A, b, cost), opts)
        if sol.status == Status.INFEASIBLE:
            raise ProjectionError("polytope is empty")
        if sol.status == Status.UNBOUNDED:
            raise ProjectionError(f"coordinate x{k + 1} is unbounded on the polytope")
        if not sol.usable:
            raise ProjectionError(f"LP for x{k + 1} ended with status {sol.status}")
        ends.append(sign * sol.primal_obj)
    return _finish(ends[0], ends[1], prob, k)


def projection_sdp(
    prob: SemialgebraicProblem, k: int, i: int, opts: SolverOptions | None = None
) -> Interval:
    """Outer interval for coordinate ``k`` from order-``i`` moment relaxations of ``min/max x_k``."""
    opts = opts or PROJECTION_SOLVER
    ends = []
    for sign in (1.0, -1.0):
        obj = Polynomial.variable(prob.n, k) * sign
        prog = build_standard(prob, i, objective=obj)
        sol = conic.solve(prog, opts)
        if sol.status == Status.INFEASIBLE:
            raise ProjectionError("relaxation of the feasible set is infeasible")
        if not sol.usable:
            raise ProjectionError(f"relaxation for x{k + 1} ended with status {sol.status}")
        # the dual value is a certified bound; the primal one only approximates it
        ends.append(sign * min(sol.dual_obj, sol.primal_obj))
    return _finish(ends[0], ends[1], prob, k)


def projection(prob: SemialgebraicProblem, k: int, i: int = 1, slack: float = 0.0,
               opts: SolverOptions | None = None) -> Interval:
    """LP projection for polytopes, SDP outer projection otherwise."""
    if prob.is_polytope() and prob.constraints:
        return projection_polytope(prob, k, slack, opts)
    return projection_sdp(prob, k, max(i, prob.min_order()), opts)


def projection_box(prob: SemialgebraicProblem, i: int = 1) -> list[Interval]:
    return [projection(prob, k, i) for k in range(prob.n)]
