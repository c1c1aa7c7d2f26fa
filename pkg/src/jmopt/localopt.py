"""Local refinement: from a (possibly infeasible) point to a feasible local minimizer.

Two phases.  An exterior quadratic penalty (multiplier grown tenfold per
loop) drives the point into the feasible set; SLSQP then polishes it with
exact polynomial gradients.  The polish is accepted only if it stays
feasible and does not increase the objective.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, nnls

from .poly import Polynomial
from .relax import SemialgebraicProblem

logger = logging.getLogger(__name__)


@dataclass
class RefineOptions:
    max_iter: int = 500
    feas_tol: float = 1e-6
    stat_tol: float = 1e-6
    penalty_start: float = 10.0
    penalty_growth: float = 10.0
    penalty_loops: int = 8
    active_tol: float = 1e-5


@dataclass
class RefineResult:
    x: np.ndarray
    value: float
    converged: bool
    feasibility: float
    stationarity: float
    start_value: float | None = None

    def __iter__(self):
        yield self.x
        yield self.value
        yield self.converged


class NoFeasiblePoint(RuntimeError):
    pass


class _Model:
    """Objective and constraints with precomputed gradient polynomials."""

    def __init__(self, prob: SemialgebraicProblem):
        n = prob.n
        cons = list(prob.constraints)
        if prob.box is not None:
            for j, b in enumerate(prob.box):
                if b is not None:
                    xj = Polynomial.variable(n, j)
                    cons += [xj - b.lo, b.hi - xj]
        self.n = n
        self.f = prob.f
        self.df = prob.f.gradient()
        self.g = cons
        self.dg = [g.gradient() for g in cons]
        self.bounds = None
        if prob.box is not None:
            self.bounds = [(None, None) if b is None else (b.lo, b.hi) for b in prob.box]

    def fval(self, x):
        return self.f(x)

    def fgrad(self, x):
        return np.array([d(x) for d in self.df])

    def gval(self, x):
        return np.array([g(x) for g in self.g])

    def gjac(self, x):
        if not self.g:
            return np.zeros((0, self.n))
        return np.array([[d(x) for d in row] for row in self.dg])

    def infeasibility(self, x) -> float:
        if not self.g:
            return 0.0
        return float(max(0.0, -self.gval(x).min()))

    def clip(self, x):
        if self.bounds is None:
            return x
        lo = np.array([-np.inf if b[0] is None else b[0] for b in self.bounds])
        hi = np.array([np.inf if b[1] is None else b[1] for b in self.bounds])
        return np.clip(x, lo, hi)

    def stationarity(self, x, active_tol: float) -> float:
        """``min_{mu >= 0} |grad f - sum_active mu_j grad g_j|``."""
        grad = self.fgrad(x)
        if not self.g:
            return float(np.linalg.norm(grad))
        gv = self.gval(x)
        active = np.nonzero(gv <= active_tol)[0]
        if not len(active):
            return float(np.linalg.norm(grad))
        J = self.gjac(x)[active]
        _, res = nnls(J.T, grad)
        return float(res)


def _penalty_phase(model: _Model, x: np.ndarray, opts: RefineOptions) -> np.ndarray:
    mu = opts.penalty_start
    for _ in range(opts.penalty_loops):

        def fun(y, mu=mu):
            gv = model.gval(y)
            viol = np.minimum(gv, 0.0)
            val = model.fval(y) + mu * float(viol @ viol)
            grad = model.fgrad(y) + 2.0 * mu * (model.gjac(y).T @ viol if len(viol) else 0.0)
            return val, grad

        res = minimize(fun, x, jac=True, method="L-BFGS-B", bounds=model.bounds,
                       options={"maxiter": opts.max_iter})
        x = model.clip(res.x)
        if model.infeasibility(x) <= opts.feas_tol:
            return x
        mu *= opts.penalty_growth
    # last resort: drop the objective and minimize the violation alone
    def viol_only(y):
        viol = np.minimum(model.gval(y), 0.0)
        return float(viol @ viol), 2.0 * (model.gjac(y).T @ viol)

    res = minimize(viol_only, x, jac=True, method="L-BFGS-B", bounds=model.bounds,
                   options={"maxiter": opts.max_iter, "ftol": 1e-20, "gtol": 1e-14})
    return model.clip(res.x)


def _polish(model: _Model, x: np.ndarray, opts: RefineOptions) -> np.ndarray:
    cons = []
    if model.g:
        cons = [{"type": "ineq", "fun": model.gval, "jac": model.gjac}]
    res = minimize(model.fval, x, jac=model.fgrad, method="SLSQP", constraints=cons,
                   bounds=model.bounds, options={"maxiter": opts.max_iter, "ftol": 1e-14})
    return model.clip(np.asarray(res.x, dtype=float))


def refine(prob: SemialgebraicProblem, x0, opts: RefineOptions | None = None) -> RefineResult:
    """Feasible local minimizer of ``prob`` started at ``x0``.

    Raises :class:`NoFeasiblePoint` if the penalty phase cannot reach the
    feasible set.
    """
    opts = opts or RefineOptions()
    model = _Model(prob)
    x = np.asarray(x0, dtype=float).copy()
    if x.shape != (prob.n,):
        raise ValueError(f"start point must have length {prob.n}")
    x = model.clip(x)
    if model.infeasibility(x) > opts.feas_tol:
        x = _penalty_phase(model, x, opts)
        if model.infeasibility(x) > opts.feas_tol:
            raise NoFeasiblePoint(f"penalty phase ended with violation {model.infeasibility(x):.3g}")
    start_value = model.fval(x)
    best, best_val = x, start_value
    for _ in range(3):
        y = _polish(model, best, opts)
        if model.infeasibility(y) > opts.feas_tol or model.fval(y) > best_val:
            break
        moved = np.linalg.norm(y - best)
        best, best_val = y, model.fval(y)
        if moved <= 1e-12:
            break
    stat = model.stationarity(best, opts.active_tol)
    scale = max(1.0, float(np.linalg.norm(model.fgrad(best))))
    feas = model.infeasibility(best)
    converged = feas <= opts.feas_tol and stat <= opts.stat_tol * scale
    return RefineResult(best, float(best_val), bool(converged), feas, stat, float(start_value))
