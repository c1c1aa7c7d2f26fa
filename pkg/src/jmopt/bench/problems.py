"""Problem files, box rescaling and the built-in problem catalog."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from ..moments import Interval
from ..poly import Polynomial, affine_change
from ..relax import SemialgebraicProblem


class ProblemSyntaxError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass
class ProblemFile:
    problem: SemialgebraicProblem
    name: str = ""
    optimum: float | None = None
    minimizer: np.ndarray | None = None


def _term(parts: list[str], nvars: int, lineno: int) -> tuple[float, tuple[int, ...]]:
    if len(parts) != nvars + 1:
        raise ProblemSyntaxError(
            f"term needs a coefficient and {nvars} exponents, got {len(parts)} fields", lineno
        )
    try:
        coeff = float(parts[0])
    except ValueError:
        raise ProblemSyntaxError(f"bad coefficient {parts[0]!r}", lineno) from None
    try:
        exps = tuple(int(p) for p in parts[1:])
    except ValueError:
        raise ProblemSyntaxError("exponents must be integers", lineno) from None
    if any(e < 0 for e in exps):
        raise ProblemSyntaxError("exponents must be nonnegative", lineno)
    return coeff, exps


def parse_problem(text: str) -> ProblemFile:
    """Parse the line-oriented problem format (see README).

    ``bounds`` lines become box metadata and also the affine constraints
    ``x_j - lo >= 0`` and ``hi - x_j >= 0``.
    """
    nvars = None
    name = ""
    optimum = None
    minimizer = None
    sections: list[tuple[str, list]] = []
    bounds: dict[int, Interval] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        key = parts[0].lower()
        if key == "nvars":
            if len(parts) != 2 or not parts[1].isdigit() or int(parts[1]) < 1:
                raise ProblemSyntaxError("nvars needs one positive integer", lineno)
            if nvars is not None and int(parts[1]) != nvars:
                raise ProblemSyntaxError("inconsistent nvars", lineno)
            nvars = int(parts[1])
        elif key == "name":
            name = " ".join(parts[1:])
        elif key in ("objective", "constraint"):
            if len(parts) != 1:
                raise ProblemSyntaxError(f"{key} takes no arguments", lineno)
            sections.append((key, []))
        elif key == "bounds":
            if nvars is None:
                raise ProblemSyntaxError("bounds before nvars", lineno)
            if len(parts) != 4:
                raise ProblemSyntaxError("bounds needs: j lo hi", lineno)
            try:
                j, lo, hi = int(parts[1]), float(parts[2]), float(parts[3])
            except ValueError:
                raise ProblemSyntaxError("bounds needs: j lo hi", lineno) from None
            if not 1 <= j <= nvars:
                raise ProblemSyntaxError(f"variable index {j} out of range 1..{nvars}", lineno)
            if hi < lo:
                raise ProblemSyntaxError(f"empty bounds [{lo}, {hi}]", lineno)
            bounds[j - 1] = Interval(lo, hi)
        elif key == "optimum":
            try:
                optimum = float(parts[1])
            except (IndexError, ValueError):
                raise ProblemSyntaxError("optimum needs one number", lineno) from None
        elif key == "minimizer":
            try:
                minimizer = np.array([float(p) for p in parts[1:]])
            except ValueError:
                raise ProblemSyntaxError("minimizer needs numbers", lineno) from None
        else:
            if nvars is None:
                raise ProblemSyntaxError("term before nvars", lineno)
            if not sections:
                raise ProblemSyntaxError(f"unexpected line {line!r}", lineno)
            sections[-1][1].append(_term(parts, nvars, lineno))
    if nvars is None:
        raise ProblemSyntaxError("missing nvars")
    objectives = [terms for key, terms in sections if key == "objective"]
    if len(objectives) != 1:
        raise ProblemSyntaxError(f"expected exactly one objective section, found {len(objectives)}")
    if minimizer is not None and len(minimizer) != nvars:
        raise ProblemSyntaxError("minimizer length differs from nvars")
    f = Polynomial.from_terms(nvars, objectives[0])
    cons = [Polynomial.from_terms(nvars, terms) for key, terms in sections if key == "constraint"]
    box = None
    if bounds:
        box = [bounds.get(j) for j in range(nvars)]
        for j, b in sorted(bounds.items()):
            xj = Polynomial.variable(nvars, j)
            cons += [xj - b.lo, b.hi - xj]
    prob = SemialgebraicProblem(nvars, f, cons, box, name)
    return ProblemFile(prob, name, optimum, minimizer)


def _poly_lines(p: Polynomial) -> list[str]:
    return [f"{c!r} " + " ".join(str(e) for e in exps) for exps, c in sorted(p.items())]


def format_problem(pf: ProblemFile) -> str:
    """Inverse of :func:`parse_problem` (bound constraints are written as bounds only)."""
    prob = pf.problem
    lines = [f"nvars {prob.n}"]
    if pf.name:
        lines.append(f"name {pf.name}")
    lines.append("objective")
    lines += _poly_lines(prob.f)
    implied = set()
    if prob.box is not None:
        for j, b in enumerate(prob.box):
            if b is not None:
                xj = Polynomial.variable(prob.n, j)
                implied |= {xj - b.lo, b.hi - xj}
    for g in prob.constraints:
        if g in implied:
            continue
        lines.append("constraint")
        lines += _poly_lines(g)
    if prob.box is not None:
        for j, b in enumerate(prob.box):
            if b is not None:
                lines.append(f"bounds {j + 1} {b.lo!r} {b.hi!r}")
    if pf.optimum is not None:
        lines.append(f"optimum {pf.optimum!r}")
    if pf.minimizer is not None:
        lines.append("minimizer " + " ".join(repr(float(v)) for v in pf.minimizer))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# rescaling


@dataclass(frozen=True)
class BoxMap:
    """``x = center + radius * u`` taking ``[-1, 1]^n`` onto the original box."""

    center: np.ndarray
    radius: np.ndarray

    def forward(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.center) / self.radius

    def back(self, u) -> np.ndarray:
        return self.center + self.radius * np.asarray(u, dtype=float)


def rescale_to_unit_box(prob: SemialgebraicProblem) -> tuple[SemialgebraicProblem, BoxMap]:
    if not prob.has_full_box():
        raise ValueError("rescaling needs box metadata for every variable")
    center = np.array([b.midpoint for b in prob.box])
    radius = np.array([b.width / 2 for b in prob.box])
    if np.any(radius <= 0):
        raise ValueError("rescaling needs boxes of positive width")
    f = affine_change(prob.f, center, radius)
    cons = [affine_change(g, center, radius) for g in prob.constraints]
    box = [Interval(-1.0, 1.0)] * prob.n
    return SemialgebraicProblem(prob.n, f, cons, box, prob.name), BoxMap(center, radius)


# ---------------------------------------------------------------------------
# catalog


@dataclass
class CatalogEntry:
    problem: SemialgebraicProblem
    intervals: list[Interval]
    optimum: float | None = None
    value_functions: dict = field(default_factory=dict)


def _vars(n):
    return [Polynomial.variable(n, j) for j in range(n)]


def _box_constraints(n, lo=-1.0, hi=1.0):
    out = []
    for x in _vars(n):
        out += [x - lo, hi - x]
    return out


def unit_disk() -> CatalogEntry:
    """``min x2`` on the unit disk; ``J^1(y) = -sqrt(1 - y^2)``, ``J^2(y) = y``."""
    x1, x2 = _vars(2)
    prob = SemialgebraicProblem(2, x2, [1 - x1**2 - x2**2], [Interval(-1.0, 1.0)] * 2, "unit-disk")
    return CatalogEntry(
        prob,
        [Interval(-1.0, 1.0)] * 2,
        -1.0,
        {0: lambda y: -np.sqrt(np.clip(1 - np.asarray(y) ** 2, 0, None)), 1: lambda y: np.asarray(y, dtype=float)},
    )


def box_quadratic() -> CatalogEntry:
    """``min x1^2 + x2^2`` on ``[0, 1]^2``; ``J^k(y) = y^2``."""
    x1, x2 = _vars(2)
    prob = SemialgebraicProblem(2, x1**2 + x2**2, _box_constraints(2, 0.0, 1.0), [Interval(0.0, 1.0)] * 2, "box-quadratic")
    sq = lambda y: np.asarray(y, dtype=float) ** 2
    return CatalogEntry(prob, [Interval(0.0, 1.0)] * 2, 0.0, {0: sq, 1: sq})


def box_concave() -> CatalogEntry:
    """``min -x1^2 - x2^2`` on ``[0, 1]^2``; ``J^k(y) = -y^2 - 1``."""
    x1, x2 = _vars(2)
    prob = SemialgebraicProblem(2, -(x1**2) - x2**2, _box_constraints(2, 0.0, 1.0), [Interval(0.0, 1.0)] * 2, "box-concave")
    j = lambda y: -np.asarray(y, dtype=float) ** 2 - 1
    return CatalogEntry(prob, [Interval(0.0, 1.0)] * 2, -2.0, {0: j, 1: j})


def box_bilinear() -> CatalogEntry:
    """``min x1 x2 + x3^2`` on ``[-1, 1]^3``; ``J^1(y) = -|y|``."""
    x1, x2, x3 = _vars(3)
    prob = SemialgebraicProblem(3, x1 * x2 + x3**2, _box_constraints(3), [Interval(-1.0, 1.0)] * 3, "box-bilinear")
    a = lambda y: -np.abs(np.asarray(y, dtype=float))
    return CatalogEntry(prob, [Interval(-1.0, 1.0)] * 3, -1.0, {0: a, 1: a, 2: lambda y: np.asarray(y, dtype=float) ** 2 - 1})


def parameter_only() -> CatalogEntry:
    """``min x1`` on ``[0, 1]^2``; the objective depends only on the parameter."""
    x1, x2 = _vars(2)
    prob = SemialgebraicProblem(2, x1, _box_constraints(2, 0.0, 1.0), [Interval(0.0, 1.0)] * 2, "parameter-only")
    return CatalogEntry(prob, [Interval(0.0, 1.0)] * 2, 0.0, {0: lambda y: np.asarray(y, dtype=float)})


def parameter_only_quadratic() -> CatalogEntry:
    """``min x1^2 - x1`` on ``[-1, 1]^2``."""
    x1, x2 = _vars(2)
    prob = SemialgebraicProblem(2, x1**2 - x1, _box_constraints(2), [Interval(-1.0, 1.0)] * 2, "parameter-quadratic")
    return CatalogEntry(
        prob, [Interval(-1.0, 1.0)] * 2, -0.25, {0: lambda y: np.asarray(y, dtype=float) ** 2 - y}
    )


def parameter_only_cubic() -> CatalogEntry:
    """``min x1^3 - x1`` on ``[-1, 1]^2``."""
    x1, x2 = _vars(2)
    prob = SemialgebraicProblem(2, x1**3 - x1, _box_constraints(2), [Interval(-1.0, 1.0)] * 2, "parameter-cubic")
    return CatalogEntry(
        prob, [Interval(-1.0, 1.0)] * 2, -2 / (3 * np.sqrt(3)), {0: lambda y: np.asarray(y, dtype=float) ** 3 - y}
    )


def disconnected() -> CatalogEntry:
    """``min x1`` on ``{x in [-1, 1]^2 : x1^2 >= 1/4}``; infeasible slices for ``|x1| < 1/2``."""
    x1, x2 = _vars(2)
    prob = SemialgebraicProblem(
        2, x1, [x1**2 - 0.25] + _box_constraints(2), [Interval(-1.0, 1.0)] * 2, "disconnected"
    )

    def j1(y):
        y = np.asarray(y, dtype=float)
        return np.where(np.abs(y) >= 0.5, y, np.inf)

    return CatalogEntry(prob, [Interval(-1.0, 1.0)] * 2, -1.0, {0: j1})


def catalog() -> dict[str, CatalogEntry]:
    """Small problems with known value functions, keyed by name."""
    entries = [unit_disk(), box_quadratic(), box_concave(), box_bilinear(), parameter_only(), parameter_only_quadratic()]
    return {e.problem.name: e for e in entries}


# ---------------------------------------------------------------------------
# random concave quadratic programs over polytopes


def polytope_vertices(A: np.ndarray, b: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Vertices of ``{x : A x <= b}`` by enumerating ``n``-subsets of active rows."""
    m, n = A.shape
    verts = []
    for rows in itertools.combinations(range(m), n):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ x <= b + tol * max(1.0, np.abs(b).max())):
            if not any(np.allclose(x, v, atol=1e-9) for v in verts):
                verts.append(x)
    return np.array(verts)


def random_concave_qp(n: int, seed: int, extra_rows: int | None = None) -> ProblemFile:
    """``min -x'Px/2 + q'x`` over a random polytope inside ``[-1, 1]^n``.

    The objective is concave, so the minimum sits at a vertex; it is found by
    vertex enumeration and stored as the known optimum.
    """
    rng = np.random.default_rng(seed)
    extra = n + 1 if extra_rows is None else extra_rows
    while True:
        B = rng.normal(size=(n, n))
        P = B @ B.T / n
        q = rng.normal(size=n)
        A_cut = rng.normal(size=(extra, n))
        A_cut /= np.linalg.norm(A_cut, axis=1, keepdims=True)
        b_cut = rng.uniform(0.3, 0.9, size=extra)
        A = np.vstack([np.eye(n), -np.eye(n), A_cut])
        b = np.concatenate([np.ones(n), np.ones(n), b_cut])
        verts = polytope_vertices(A, b)
        vals = np.array([-0.5 * v @ P @ v + q @ v for v in verts])
        best = int(np.argmin(vals))
        if abs(vals[best]) >= 0.5:
            break
    xs = _vars(n)
    f = Polynomial.zero(n)
    for a in range(n):
        f = f + q[a] * xs[a]
        for c in range(n):
            f = f - 0.5 * P[a, c] * xs[a] * xs[c]
    cons = []
    for row, rhs in zip(A_cut, b_cut):
        g = Polynomial.constant(n, float(rhs))
        for a in range(n):
            g = g - float(row[a]) * xs[a]
        cons.append(g)
    cons += _box_constraints(n)
    prob = SemialgebraicProblem(n, f, cons, [Interval(-1.0, 1.0)] * n, f"concave-qp-{n}-{seed}")
    return ProblemFile(prob, prob.name, float(vals[best]), verts[best])


def with_box(prob: SemialgebraicProblem, box: list[Interval]) -> SemialgebraicProblem:
    return replace(prob, box=list(box))
