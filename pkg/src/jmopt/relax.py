"""Moment relaxations: plain moment-SOS hierarchy and joint+marginal parametric ones.

The parametric relaxation of order ``i`` with parameter ``x_k`` is::

    minimize    L_z(f)
    subject to  M_i(z) PSD,   M_{i-v_j}(g_j z) PSD
                L_z(x_k^l) = beta_l,   l = 0..2i

with ``beta`` the moments of the parameter's marginal distribution.  The
multipliers of the marginal rows are the coefficients of a univariate
polynomial ``p(y) = sum_l lam_l y^l`` that bounds the value function
``J(y) = min {f(x) : x in K, x_k = y}`` from below.

Constraint pairs ``g >= 0`` and ``-g >= 0`` are recognised and imposed as
the linear equalities ``L_z(g x^gamma) = 0`` (all ``|gamma| <= 2(i - v)``),
which is the same feasible set without an empty-interior PSD block.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import conic
from .conic import ConicProgram, ConicSolution, SolverOptions, Status
from .moments import (
    AffineMatrixMap,
    Interval,
    localizing_matrix_map,
    moment_matrix_map,
    uniform_moments,
)
from .poly import Polynomial, monomial_count, rank_monomials, substitute

logger = logging.getLogger(__name__)

#: prefix substitution turning a constraint into a constant below this is fatal
NEGATIVE_CONSTANT_TOL = 1e-9


class OrderTooSmall(ValueError):
    pass


class InfeasibleFixing(ValueError):
    """Fixing variables made some constraint a negative constant."""


@dataclass(frozen=True)
class SignSet:
    """Uniform distribution on a finite set of parameter values (e.g. ``{-1, 1}``)."""

    points: tuple[float, ...] = (-1.0, 1.0)

    def moments(self, max_deg: int) -> np.ndarray:
        pts = np.asarray(self.points, dtype=float)
        return np.array([np.mean(pts**l) for l in range(max_deg + 1)])

    @property
    def lo(self) -> float:
        return min(self.points)

    @property
    def hi(self) -> float:
        return max(self.points)

    def __str__(self):
        return "{" + ", ".join(f"{p:g}" for p in self.points) + "}"


def _marginal_moments(support, max_deg: int) -> np.ndarray:
    if isinstance(support, SignSet):
        return support.moments(max_deg)
    return uniform_moments(support, max_deg)


@dataclass
class SemialgebraicProblem:
    """``min f(x)`` subject to ``g_j(x) >= 0``; ``box`` is optional bound metadata."""

    n: int
    f: Polynomial
    constraints: list[Polynomial] = field(default_factory=list)
    box: list[Interval | None] | None = None
    name: str = ""

    def __post_init__(self):
        if self.f.nvars != self.n:
            raise ValueError(f"objective has {self.f.nvars} variables, problem has {self.n}")
        for j, g in enumerate(self.constraints):
            if g.nvars != self.n:
                raise ValueError(f"constraint {j} has {g.nvars} variables, problem has {self.n}")
        if self.box is not None and len(self.box) != self.n:
            raise ValueError("box metadata needs one entry per variable")

    @property
    def m(self) -> int:
        return len(self.constraints)

    @property
    def degree(self) -> int:
        return max([self.f.degree] + [g.degree for g in self.constraints])

    def min_order(self) -> int:
        return max(1, math.ceil(self.degree / 2))

    def objective(self, x) -> float:
        return self.f(x)

    def constraint_values(self, x) -> np.ndarray:
        return np.array([g(x) for g in self.constraints])

    def feasibility_residual(self, x) -> float:
        """``max_j max(0, -g_j(x))``."""
        if not self.constraints:
            return 0.0
        return float(max(0.0, -min(g(x) for g in self.constraints)))

    def is_polytope(self) -> bool:
        return all(g.degree <= 1 for g in self.constraints)

    def has_full_box(self) -> bool:
        return self.box is not None and all(b is not None for b in self.box)

    def axis_bounds(self) -> tuple[list[float], list[float]]:
        """Per-variable ``(lo, hi)`` from box metadata and univariate affine constraints; may be infinite."""
        lo = [-math.inf] * self.n
        hi = [math.inf] * self.n
        if self.box is not None:
            for j, b in enumerate(self.box):
                if b is not None:
                    lo[j], hi[j] = b.lo, b.hi
        for g in self.constraints:
            vs = g.variables()
            if g.degree != 1 or len(vs) != 1:
                continue
            (j,) = vs
            a = g.coefficient(tuple(1 if t == j else 0 for t in range(self.n)))
            t = -g.constant_term() / a
            if a > 0:
                lo[j] = max(lo[j], t)
            else:
                hi[j] = min(hi[j], t)
        return lo, hi

    def inferred_box(self) -> list[Interval | None]:
        """Box metadata, completed from univariate affine constraints ``a x_j + b >= 0``."""
        lo, hi = self.axis_bounds()
        return [Interval(l, h) if math.isfinite(l) and math.isfinite(h) and h >= l else None
                for l, h in zip(lo, hi)]

    def fix(self, k: int, value: float) -> "SemialgebraicProblem":
        """Problem with variable ``k`` removed and set to ``value``.

        Constraints that become constants are dropped when nonnegative;
        a negative constant raises :class:`InfeasibleFixing`.
        """
        f = substitute(self.f, k, value)
        cons = _drop_constants(
            [substitute(g, k, value) for g in self.constraints], context=f"x{k + 1} = {value:g}"
        )
        box = None if self.box is None else self.box[:k] + self.box[k + 1 :]
        return SemialgebraicProblem(self.n - 1, f, cons, box, self.name)

    def fix_prefix(self, values: Sequence[float]) -> "SemialgebraicProblem":
        prob = self
        for v in values:
            prob = prob.fix(0, v)
        return prob


def _upper_bound(g: Polynomial) -> float | None:
    """Constant term when every other term is ``-c * x_j^(2m)`` (so ``g <= constant``), else None."""
    for e, c in g.items():
        if sum(e) == 0:
            continue
        if c > 0 or sum(1 for a in e if a) != 1 or sum(e) % 2:
            return None
    return g.constant_term()


def _drop_constants(cons: list[Polynomial], context: str = "") -> list[Polynomial]:
    out = []
    for g in cons:
        if not g.is_constant():
            bound = _upper_bound(g)
            if bound is not None and bound < -NEGATIVE_CONSTANT_TOL:
                raise InfeasibleFixing(f"constraint {g} is bounded above by {bound:.6g} < 0 after fixing {context}")
            out.append(g)
            continue
        c = g.constant_term()
        if c < -NEGATIVE_CONSTANT_TOL:
            raise InfeasibleFixing(f"constraint became the negative constant {c:.6g} after fixing {context}")
        if c < 0:
            warnings.warn(f"constraint is the constant {c:.3g} after fixing {context}; treated as active", stacklevel=3)
    return out


# ---------------------------------------------------------------------------
# structure of the constraint list


def split_constraints(cons: Sequence[Polynomial], tol: float = 1e-12):
    """Separate inequality constraints from ``(g, -g)`` pairs.

    Returns ``(inequalities, equalities)``; each pair contributes its first
    member to ``equalities``.
    """
    used = [False] * len(cons)
    ineq, eq = [], []
    for a, g in enumerate(cons):
        if used[a]:
            continue
        partner = None
        for b in range(a + 1, len(cons)):
            if not used[b] and (g + cons[b]).allclose(Polynomial.zero(g.nvars), atol=tol):
                partner = b
                break
        if partner is not None:
            used[a] = used[partner] = True
            eq.append(g)
        else:
            used[a] = True
            ineq.append(g)
    return ineq, eq


def _bounds_variable(g: Polynomial) -> tuple[int, bool, bool] | None:
    """If ``g >= 0`` bounds a single variable, return (var, bounds_below, bounds_above)."""
    vs = g.variables()
    if len(vs) != 1:
        return None
    (j,) = vs
    d = g.degree
    lead = [c for e, c in g.items() if e[j] == d][0]
    if d == 1:
        return (j, lead > 0, lead < 0)
    if d % 2 == 0 and lead < 0:
        return (j, True, True)
    return None


def _is_ball(g: Polynomial) -> bool:
    n = g.nvars
    if g.degree != 2 or g.constant_term() <= 0:
        return False
    for e, c in g.items():
        if sum(e) == 0:
            continue
        if sum(e) != 2 or max(e) != 2 or c >= 0:
            return False
    return all(g.coefficient(tuple(2 if t == j else 0 for t in range(n))) < 0 for j in range(n))


def _quadratically_bounded(prob: SemialgebraicProblem) -> list[bool]:
    """Per variable: is ``x_j^2`` bounded at order 1 by a univariate even-degree constraint."""
    out = [False] * prob.n
    for g in prob.constraints:
        info = _bounds_variable(g)
        if info and g.degree >= 2:
            out[info[0]] = True
    return out


def archimedean_evident(prob: SemialgebraicProblem) -> bool:
    """Whether the constraint list visibly certifies a bounded quadratic module.

    True when a ball/ellipsoid constraint is present, or every variable has
    a univariate even-degree bound such as ``1 - x_j^2 >= 0``.  Affine
    bounds alone do not count: at order 1 they leave ``L(x_j^2)`` free.
    """
    if any(_is_ball(g) for g in prob.constraints):
        return True
    return all(_quadratically_bounded(prob))


def ball_constraint(prob: SemialgebraicProblem) -> Polynomial | None:
    """``R^2 - |x|^2`` from box metadata, or None without a full box."""
    if not prob.has_full_box():
        return None
    r2 = sum(max(b.lo**2, b.hi**2) for b in prob.box)
    g = Polynomial.constant(prob.n, r2)
    for j in range(prob.n):
        g = g - Polynomial.variable(prob.n, j) ** 2
    return g


def box_products(prob: SemialgebraicProblem, only_missing: bool = True) -> list[Polynomial]:
    """Redundant constraints ``(hi_j - x_j)(x_j - lo_j) >= 0`` from box metadata or affine bounds."""
    have = _quadratically_bounded(prob) if only_missing else [False] * prob.n
    out = []
    for j, b in enumerate(prob.inferred_box()):
        if b is None or have[j]:
            continue
        xj = Polynomial.variable(prob.n, j)
        out.append((b.hi - xj) * (xj - b.lo))
    return out


def with_archimedean_guard(prob: SemialgebraicProblem) -> SemialgebraicProblem:
    """Append redundant box products for variables without a quadratic bound.

    Their sum dominates a ball constraint, so the quadratic module becomes
    Archimedean, and unlike one ball they bound every ``L(x_j^2)`` tightly.
    """
    if prob.n == 0 or archimedean_evident(prob):
        return prob
    extra = box_products(prob)
    covered = _quadratically_bounded(replace(prob, constraints=list(prob.constraints) + extra))
    if not all(covered):
        # compact polytopes are Archimedean without help
        log = logger.info if prob.is_polytope() else logger.warning
        log("problem %r: variables %s lack box metadata for the compactness guard",
            prob.name, [j + 1 for j, c in enumerate(covered) if not c])
    if not extra:
        return prob
    return replace(prob, constraints=list(prob.constraints) + extra)


# ---------------------------------------------------------------------------
# builders


def _check_order(prob: SemialgebraicProblem, i: int):
    if i < 1:
        raise OrderTooSmall("relaxation order must be at least 1")
    if 2 * i < prob.f.degree:
        raise OrderTooSmall(f"order {i} too small for objective of degree {prob.f.degree}")
    for j, g in enumerate(prob.constraints):
        if 2 * i < g.degree:
            raise OrderTooSmall(f"order {i} too small for constraint {j} of degree {g.degree}")


def _assemble(
    prob: SemialgebraicProblem,
    i: int,
    marginal: dict[int, float],
    k: int | None,
    guard: bool,
) -> ConicProgram:
    _check_order(prob, i)
    if guard:
        prob = with_archimedean_guard(prob)
    n = prob.n
    order = rank_monomials(n, 2 * i)
    nvar = order.size

    objective: dict[int, float] = {}
    for e, c in prob.f.items():
        r = order.rank(e)
        objective[r] = objective.get(r, 0.0) + c

    equalities: list[tuple[dict[int, float], float]] = []
    eq_polys: list[Polynomial] = []
    labels: list[str] = []
    for l, beta in sorted(marginal.items()):
        e = [0] * n
        if l:
            e[k] = l
        equalities.append(({order.rank(tuple(e)): 1.0}, float(beta)))
        eq_polys.append(Polynomial.monomial(e))
        labels.append(f"marginal:{l}")

    ineq, eq = split_constraints(_drop_constants(list(prob.constraints)))
    blocks = [moment_matrix_map(n, i)]
    for j, g in enumerate(ineq):
        v = math.ceil(g.degree / 2)
        blocks.append(localizing_matrix_map(g, i - v, label=f"g{j}"))
    for j, h in enumerate(eq):
        v = math.ceil(h.degree / 2)
        for gamma in rank_monomials(n, 2 * (i - v)).monomials:
            row: dict[int, float] = {}
            for u, c in h.items():
                r = order.rank(tuple(a + b for a, b in zip(u, gamma)))
                row[r] = row.get(r, 0.0) + c
            equalities.append((row, 0.0))
            eq_polys.append(h * Polynomial.monomial(gamma))
            labels.append(f"eq{j}:{gamma}")

    return ConicProgram(
        nvar,
        objective,
        equalities,
        blocks,
        objective_poly=prob.f,
        equality_polys=eq_polys,
        equality_labels=labels,
    )


def build_parametric(
    prob: SemialgebraicProblem,
    k: int,
    iv,
    i: int,
    degrees: Sequence[int] | None = None,
    guard: bool = True,
) -> ConicProgram:
    """Joint+marginal relaxation of order ``i`` with parameter ``x_k`` on ``iv``.

    ``iv`` is an :class:`Interval` (uniform marginal) or a :class:`SignSet`.
    ``degrees`` restricts which marginal moments are imposed (default
    ``0..2i``).
    """
    if not 0 <= k < prob.n:
        raise IndexError(f"parameter index {k} out of range for {prob.n} variables")
    degrees = list(range(2 * i + 1)) if degrees is None else sorted(set(degrees) | {0})
    beta = _marginal_moments(iv, max(degrees))
    return _assemble(prob, i, {l: beta[l] for l in degrees}, k, guard)


def build_standard(
    prob: SemialgebraicProblem, i: int, objective: Polynomial | None = None, guard: bool = True
) -> ConicProgram:
    """Order-``i`` moment-SOS relaxation (normalization ``z_0 = 1`` only)."""
    if objective is not None:
        prob = replace(prob, f=objective)
    return _assemble(prob, i, {0: 1.0}, None, guard)


def build_parametric_fixed_prefix(
    prob: SemialgebraicProblem,
    fixed_prefix: Sequence[float],
    iv,
    i: int,
    degrees: Sequence[int] | None = None,
    guard: bool = True,
) -> ConicProgram:
    """Parametric relaxation of the problem with ``x_0..x_{p-1}`` fixed.

    The parameter is the first free variable, ``x_p`` with ``p = len(fixed_prefix)``.
    """
    if len(fixed_prefix) >= prob.n:
        raise ValueError("prefix must leave at least one free variable")
    reduced = prob.fix_prefix(fixed_prefix)
    return build_parametric(reduced, 0, iv, i, degrees, guard)


# ---------------------------------------------------------------------------
# value polynomials


@dataclass
class ValuePolynomial:
    """Univariate lower bound ``p(y) = sum_l coeffs[l] y^l`` on ``interval``."""

    coord: int
    coeffs: np.ndarray
    interval: object
    order: int
    dual_obj: float

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return np.polynomial.polynomial.polyval(y, self.coeffs)

    @property
    def degree(self) -> int:
        nz = np.nonzero(np.abs(self.coeffs) > 0)[0]
        return int(nz[-1]) if len(nz) else 0

    def mean(self) -> float:
        """Integral against the marginal distribution."""
        beta = _marginal_moments(self.interval, len(self.coeffs) - 1)
        return float(self.coeffs @ beta)


def extract_value_poly(prog: ConicProgram, sol: ConicSolution, k: int, iv, i: int) -> ValuePolynomial:
    """Read ``p_i`` off the multipliers of the marginal rows."""
    if not sol.usable:
        raise ValueError(f"cannot extract a value polynomial from a {sol.status} solution")
    labels = prog.equality_labels or []
    coeffs: dict[int, float] = {}
    for r, lab in enumerate(labels):
        if lab.startswith("marginal:"):
            coeffs[int(lab.split(":")[1])] = float(sol.dual_eq[r])
    if not coeffs:
        raise ValueError("program has no marginal rows")
    vec = np.zeros(max(coeffs) + 1)
    for l, c in coeffs.items():
        vec[l] = c
    beta = _marginal_moments(iv, len(vec) - 1)
    return ValuePolynomial(k, vec, iv, i, float(vec @ beta))


@dataclass
class RelaxationResult:
    primal_value: float
    dual_value: float
    value_poly: ValuePolynomial | None
    status: Status
    certificate_residual: float
    program: ConicProgram
    solution: ConicSolution

    @property
    def feasible(self) -> bool:
        return self.solution.usable


def solve_relaxation(prog: ConicProgram, k: int | None, iv, i: int, opts: SolverOptions | None = None) -> RelaxationResult:
    sol = conic.solve(prog, opts)
    vp = None
    cert = np.inf
    if sol.usable:
        cert = conic.check_certificate(prog, sol).max_residual
        if k is not None:
            vp = extract_value_poly(prog, sol, k, iv, i)
    return RelaxationResult(sol.primal_obj, sol.dual_obj, vp, sol.status, cert, prog, sol)


def solve_parametric(
    prob: SemialgebraicProblem,
    k: int,
    iv,
    i: int,
    opts: SolverOptions | None = None,
    degrees: Sequence[int] | None = None,
) -> RelaxationResult:
    prog = build_parametric(prob, k, iv, i, degrees)
    return solve_relaxation(prog, k, iv, i, opts)


def solve_standard(prob: SemialgebraicProblem, i: int, opts: SolverOptions | None = None) -> RelaxationResult:
    prog = build_standard(prob, i)
    return solve_relaxation(prog, None, None, i, opts)
