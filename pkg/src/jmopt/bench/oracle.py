"""Sampled value functions ``J^k(y) = min {f(x) : x in K, x_k = y}`` by lattice scan plus local search."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from ..localopt import NoFeasiblePoint, RefineOptions, refine
from ..moments import Interval
from ..relax import InfeasibleFixing, SemialgebraicProblem

logger = logging.getLogger(__name__)

FEAS_TOL = 0.0
SEARCH_TOL = 1e-9


@dataclass
class SampledValueFunction:
    coord: int
    grid: np.ndarray
    values: np.ndarray

    @property
    def feasible(self) -> np.ndarray:
        return np.isfinite(self.values)


def _lattice(box: list[Interval], points: int) -> np.ndarray:
    axes = [b.grid(points) for b in box]
    return np.array(list(itertools.product(*axes))).reshape(-1, len(box))


def _violation(prob: SemialgebraicProblem, pts: np.ndarray) -> np.ndarray:
    if not prob.constraints:
        return np.zeros(len(pts))
    vals = np.stack([g.evaluate_many(pts) for g in prob.constraints], axis=1)
    return np.maximum(0.0, -vals.min(axis=1))


def slice_minimum(prob: SemialgebraicProblem, lattice_points: int, starts: int = 3) -> float:
    """Approximate global minimum of a (small) problem; ``inf`` if no feasible point is found."""
    if prob.n == 0:
        return float(prob.f(np.zeros(0))) if _violation(prob, np.zeros((1, 0)))[0] <= FEAS_TOL else math.inf
    box = prob.inferred_box()
    if any(b is None for b in box):
        raise ValueError("oracle needs bounds (box metadata or affine bounds) on every variable")
    pts = _lattice(box, lattice_points)
    viol = _violation(prob, pts)
    fvals = prob.f.evaluate_many(pts)
    feasible = viol <= FEAS_TOL
    best = float(fvals[feasible].min()) if feasible.any() else math.inf
    # local search from the best feasible lattice points and the least violated ones
    order = np.lexsort((fvals, np.where(feasible, 0.0, viol)))
    anchor = pts[order[0]] if feasible.any() else None
    opts = RefineOptions(feas_tol=SEARCH_TOL)
    for idx in order[:starts]:
        try:
            res = refine(prob, pts[idx], opts)
        except NoFeasiblePoint:
            continue
        x = _pull_back(prob, res.x, anchor)
        if x is not None:
            best = min(best, float(prob.f(x)))
    return best


def _pull_back(prob: SemialgebraicProblem, x: np.ndarray, anchor: np.ndarray | None):
    """``x`` if exactly feasible, else the feasible point nearest to it on the segment from ``anchor``.

    Accepting slightly infeasible points would let the oracle undershoot
    ``J`` wherever the slice is thin.
    """
    if prob.feasibility_residual(x) <= FEAS_TOL:
        return x
    if anchor is None:
        return None
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if prob.feasibility_residual(anchor + mid * (x - anchor)) <= FEAS_TOL:
            lo = mid
        else:
            hi = mid
    return anchor + lo * (x - anchor)


def brute_force_value_function(
    prob: SemialgebraicProblem,
    k: int,
    iv: Interval,
    grid_points: int = 101,
    lattice_points: int | None = None,
    starts: int = 3,
) -> SampledValueFunction:
    """``J^k`` on an evenly spaced grid of ``iv``; ``inf`` where the slice looks empty."""
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    if lattice_points is None:
        lattice_points = {0: 1, 1: 401, 2: 41, 3: 15}.get(prob.n - 1, 9)
    grid = iv.grid(grid_points)
    values = np.empty(grid_points)
    for a, y in enumerate(grid):
        try:
            sub = prob.fix(k, float(y))
        except InfeasibleFixing:
            values[a] = math.inf
            continue
        values[a] = slice_minimum(sub, lattice_points, starts)
    return SampledValueFunction(k, grid, values)
