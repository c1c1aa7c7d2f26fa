"""Value-function and MAXCUT batch reports, with CSV output."""
from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from typing import Callable, Sequence

import numpy as np

from ..algo import AlgoConfig, maxcut_maxgap, maxcut_problem
from ..conic import SolverOptions
from ..moments import Interval
from ..relax import SemialgebraicProblem, SignSet, solve_parametric, solve_standard
from .maxcut import MAX_BRUTE_FORCE, brute_force_maxcut, gen_maxcut
from .oracle import SampledValueFunction, brute_force_value_function


def fmt(v) -> str:
    """Deterministic text for CSV cells."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v) + 0.0
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return f"{v:.10g}"
    return str(v)


def to_csv(rows: Sequence, header: Sequence[str] | None = None) -> str:
    """Rows of dataclasses (or sequences with ``header``) as CSV text with ``\\n`` line ends."""
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    if rows and header is None:
        header = [f.name for f in fields(rows[0])]
    if header is not None:
        w.writerow(header)
    for r in rows:
        vals = [getattr(r, h) for h in header] if hasattr(r, "__dataclass_fields__") else r
        w.writerow([fmt(v) for v in vals])
    return out.getvalue()


# ---------------------------------------------------------------------------
# value functions


@dataclass
class ValueFunctionRow:
    order: int
    status: str
    primal: float
    dual: float
    l1_error: float
    l1_error_running: float
    max_violation: float
    certificate: float


def sign_value_function(prob: SemialgebraicProblem, k: int, support: SignSet) -> SampledValueFunction:
    """``J^k`` at each support point by enumerating the remaining coordinates over the same points."""
    grid = np.array(support.points, dtype=float)
    vals = np.empty(len(grid))
    others = [j for j in range(prob.n) if j != k]
    for a, y in enumerate(grid):
        best = math.inf
        for combo in itertools.product(support.points, repeat=len(others)):
            x = np.empty(prob.n)
            x[k] = y
            x[others] = combo
            if prob.feasibility_residual(x) <= 1e-12:
                best = min(best, prob.f(x))
        vals[a] = best
    return SampledValueFunction(k, grid, vals)


def _quadrature(values: np.ndarray, grid: np.ndarray, support) -> float:
    """Mean of ``values`` under the parameter distribution (trapezoid rule on intervals)."""
    if isinstance(support, SignSet):
        return float(np.mean(values))
    w = np.full(len(grid), 1.0)
    w[0] = w[-1] = 0.5
    return float(w @ values / w.sum())


def report_value_function(
    prob: SemialgebraicProblem,
    k: int,
    iv,
    orders: Sequence[int],
    grid: int = 101,
    oracle: SampledValueFunction | None = None,
    opts: SolverOptions | None = None,
) -> list[ValueFunctionRow]:
    """Per order: relaxation values, L1 errors of ``p_i`` and of the running max, worst lower-bound violation."""
    is_sign = isinstance(iv, SignSet)
    if oracle is None:
        oracle = sign_value_function(prob, k, iv) if is_sign else brute_force_value_function(prob, k, iv, grid)
    ys, J = oracle.grid, oracle.values
    finite = np.isfinite(J)
    running = np.full(len(ys), -np.inf)
    rows = []
    for i in orders:
        res = solve_parametric(prob, k, iv, i, opts, degrees=(0, 1) if is_sign else None)
        if not res.feasible:
            rows.append(ValueFunctionRow(i, str(res.status), res.primal_value, res.dual_value,
                                         math.nan, math.nan, math.nan, math.inf))
            continue
        p = res.value_poly(ys)
        running = np.maximum(running, p)
        gap = np.where(finite, np.abs(J - p), 0.0)
        gap_run = np.where(finite, np.abs(J - running), 0.0)
        viol = float(np.max(np.where(finite, p - J, -np.inf)))
        rows.append(ValueFunctionRow(
            i, str(res.status), res.primal_value, res.dual_value,
            _quadrature(gap, ys, iv), _quadrature(gap_run, ys, iv), viol, res.certificate_residual,
        ))
    return rows


# ---------------------------------------------------------------------------
# MAXCUT batches


@dataclass
class MaxcutRow:
    instance: int
    seed: int
    n: int
    edges: int
    shor: float
    maxgap: float
    optimum: float
    ratio_shor: float
    ratio_opt: float
    signs: str


@dataclass
class MaxcutSummary:
    rows: list[MaxcutRow]
    mean_ratio_shor: float
    mean_ratio_opt: float

    def text(self) -> str:
        lines = [
            f"instances={len(self.rows)}",
            f"mean (rho - shor)/|shor| = {self.mean_ratio_shor:.6g}",
        ]
        if not math.isnan(self.mean_ratio_opt):
            lines.append(f"mean (rho - opt)/|opt| = {self.mean_ratio_opt:.6g}")
        return "\n".join(lines)


def shor_bound(Q, opts: SolverOptions | None = None) -> float:
    """Order-1 standard relaxation value of ``min x'Qx`` on ``{-1, 1}^n``."""
    res = solve_standard(maxcut_problem(Q), 1, opts)
    if not res.feasible:
        raise RuntimeError(f"Shor relaxation ended with status {res.status}")
    return float(res.primal_value)


def _ratio(value: float, ref: float) -> float:
    if abs(ref) < 1e-12:
        return 0.0 if abs(value - ref) < 1e-9 else math.inf
    return (value - ref) / abs(ref)


def maxcut_row(Q, instance: int = 0, seed: int = 0, order: int = 1, brute: bool = True) -> MaxcutRow:
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    cut = maxcut_maxgap(Q, AlgoConfig(order=order))
    shor = shor_bound(Q)
    opt = brute_force_maxcut(Q)[0] if brute and n <= MAX_BRUTE_FORCE else math.nan
    edges = int(np.count_nonzero(np.triu(Q, 1)))
    return MaxcutRow(
        instance, seed, n, edges, shor, cut.cost, opt,
        _ratio(cut.cost, shor), _ratio(cut.cost, opt) if not math.isnan(opt) else math.nan,
        " ".join("+" if s > 0 else "-" for s in cut.signs),
    )


def _batch_job(args) -> MaxcutRow:
    idx, n, density, seed, order = args
    inst = gen_maxcut(n, density, seed)
    return maxcut_row(inst.Q, idx, seed, order)


def report_maxcut_batch(
    n: int, count: int, density: float = 0.5, base_seed: int = 0, order: int = 1, jobs: int = 1
) -> MaxcutSummary:
    """Max-gap cost vs the Shor bound (and brute force when ``n`` allows) over seeded instances.

    Instance ``t`` uses seed ``base_seed + t``; rows come back in instance order.
    """
    tasks = [(t, n, density, base_seed + t, order) for t in range(count)]
    if jobs > 1 and count > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_batch_job, tasks))
    else:
        rows = [_batch_job(t) for t in tasks]
    ratios = [r.ratio_shor for r in rows]
    opt_ratios = [r.ratio_opt for r in rows if not math.isnan(r.ratio_opt)]
    return MaxcutSummary(
        rows,
        float(np.mean(ratios)) if ratios else math.nan,
        float(np.mean(opt_ratios)) if opt_ratios else math.nan,
    )
