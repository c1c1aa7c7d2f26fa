"""Uniform-marginal moments and moment / localizing matrices.

Moment and localizing matrices are built as :class:`AffineMatrixMap`
objects: each entry is a sparse linear form over the ranks of a moment
vector (graded-lex order from :mod:`jmopt.poly`).  The same map is used to
assemble semidefinite programs and to check certificates.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .poly import Polynomial, rank_monomials, monomial_count


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.hi < self.lo:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def clamp(self, x: float) -> float:
        return min(max(x, self.lo), self.hi)

    def bisect(self) -> tuple["Interval", "Interval"]:
        m = self.midpoint
        return Interval(self.lo, m), Interval(m, self.hi)

    def widen(self, eps: float) -> "Interval":
        return Interval(self.lo - eps, self.hi + eps)

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def grid(self, num: int) -> np.ndarray:
        return np.linspace(self.lo, self.hi, num)

    def __iter__(self):
        yield self.lo
        yield self.hi

    def __str__(self):
        return f"[{self.lo:.10g}, {self.hi:.10g}]"


def uniform_moments(iv: Interval, max_deg: int) -> np.ndarray:
    """Moments ``beta_0 .. beta_max_deg`` of the uniform distribution on ``iv``.

    ``beta_l = (hi^(l+1) - lo^(l+1)) / ((l+1) (hi - lo))``.
    """
    lo, hi = float(iv.lo), float(iv.hi)
    if not hi > lo:
        raise ValueError(f"degenerate interval [{lo}, {hi}]")
    if max_deg < 0:
        raise ValueError("max_deg must be nonnegative")
    out = np.empty(max_deg + 1)
    width = hi - lo
    # hi^(l+1) - lo^(l+1) = (hi - lo) * sum_{j} hi^j lo^(l-j) avoids cancellation
    # for narrow intervals away from zero.
    for l in range(max_deg + 1):
        if abs(lo) < 0.5 * width or abs(hi) < 0.5 * width:
            out[l] = (hi ** (l + 1) - lo ** (l + 1)) / ((l + 1) * width)
        else:
            out[l] = sum(hi**j * lo ** (l - j) for j in range(l + 1)) / (l + 1)
    return out


@dataclass
class MomentVector:
    """Truncated (pseudo-)moment sequence indexed by graded-lex rank up to degree ``2 * order``."""

    order: int
    n: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        need = monomial_count(self.n, 2 * self.order)
        if self.values.shape != (need,):
            raise ValueError(f"moment vector of order {self.order} in {self.n} variables needs {need} entries")

    @classmethod
    def from_points(cls, points, order: int, weights=None) -> "MomentVector":
        """Moments of a finite atomic measure (point masses at the rows of ``points``)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = pts.shape[1]
        w = np.full(len(pts), 1.0 / len(pts)) if weights is None else np.asarray(weights, dtype=float)
        basis = rank_monomials(n, 2 * order)
        vals = np.zeros(basis.size)
        for x, wt in zip(pts, w):
            vals += wt * basis.vector(x)
        return cls(order, n, vals)

    def riesz(self, p: Polynomial) -> float:
        """Riesz functional ``L_z(p) = sum_alpha p_alpha z_alpha``."""
        if p.nvars != self.n:
            raise ValueError("polynomial and moment vector disagree on the number of variables")
        order = rank_monomials(self.n, 2 * self.order)
        total = 0.0
        for e, c in p.items():
            if sum(e) > 2 * self.order:
                raise ValueError(f"monomial {e} exceeds moment order {2 * self.order}")
            total += c * self.values[order.rank(e)]
        return float(total)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class AffineMatrixMap:
    """Symmetric matrix whose entries are linear forms in a moment vector.

    Only the upper triangle is stored, as ``(row, col, rank, coeff)``
    entries with ``row <= col``; ``apply`` mirrors it.  ``constant`` holds an
    optional fixed matrix added to the result.

    ``weight``/``basis_degree``/``n`` record how the map was generated
    (localizing polynomial and the Gram basis degree) so a dual matrix can
    be turned back into a polynomial ``weight * v' Z v``.
    """

    size: int
    entries: tuple[tuple[int, int, int, float], ...]
    constant: np.ndarray | None = None
    weight: Polynomial | None = None
    basis_degree: int | None = None
    n: int | None = None
    label: str = ""

    def __post_init__(self):
        for r, c, _, _ in self.entries:
            if not (0 <= r <= c < self.size):
                raise ValueError(f"entry ({r}, {c}) outside the upper triangle of a {self.size}x{self.size} map")

    @property
    def max_rank(self) -> int:
        return max((k for _, _, k, _ in self.entries), default=-1)

    def linear_form(self, row: int, col: int) -> dict[int, float]:
        if row > col:
            row, col = col, row
        form: dict[int, float] = {}
        for r, c, k, v in self.entries:
            if r == row and c == col:
                form[k] = form.get(k, 0.0) + v
        return form

    def tensor(self, nvar: int) -> np.ndarray:
        """Dense ``(nvar, size, size)`` array of coefficient matrices."""
        if self.max_rank >= nvar:
            raise ValueError(f"map references rank {self.max_rank}, vector has only {nvar} entries")
        out = np.zeros((nvar, self.size, self.size))
        for r, c, k, v in self.entries:
            out[k, r, c] += v
            if r != c:
                out[k, c, r] += v
        return out

    def constant_matrix(self) -> np.ndarray:
        if self.constant is None:
            return np.zeros((self.size, self.size))
        return np.asarray(self.constant, dtype=float)


def apply(amap: AffineMatrixMap, z) -> np.ndarray:
    """Evaluate the map at a moment vector (or plain array)."""
    vals = z.values if isinstance(z, MomentVector) else np.asarray(z, dtype=float)
    if amap.max_rank >= len(vals):
        raise ValueError(f"map references rank {amap.max_rank}, vector has only {len(vals)} entries")
    out = amap.constant_matrix().copy()
    for r, c, k, v in amap.entries:
        out[r, c] += v * vals[k]
        if r != c:
            out[c, r] += v * vals[k]
    return out


def localizing_matrix_map(q: Polynomial, i: int, label: str = "") -> AffineMatrixMap:
    """Map ``z -> M_i(q z)`` with entries ``sum_u q_u z_{alpha+beta+u}``."""
    if i < 0:
        raise ValueError("order must be nonnegative")
    n = q.nvars
    basis = rank_monomials(n, i)
    full = rank_monomials(n, 2 * i + q.degree)
    terms = list(q.items())
    entries = []
    mons = basis.monomials
    for a in range(basis.size):
        for b in range(a, basis.size):
            ab = tuple(x + y for x, y in zip(mons[a], mons[b]))
            for u, coeff in terms:
                entries.append((a, b, full.rank(tuple(x + y for x, y in zip(ab, u))), coeff))
    return AffineMatrixMap(basis.size, tuple(entries), weight=q, basis_degree=i, n=n, label=label)


def moment_matrix_map(n: int, i: int) -> AffineMatrixMap:
    """Map ``z -> M_i(z)``; entry ``(alpha, beta)`` reads ``z_{alpha+beta}``."""
    return localizing_matrix_map(Polynomial.constant(n, 1.0), i, label="moment")


def gram_polynomial(gram: np.ndarray, n: int, degree: int) -> Polynomial:
    """Polynomial ``v(x)' G v(x)`` for the graded-lex monomial vector ``v`` of the given degree."""
    basis = rank_monomials(n, degree)
    gram = np.asarray(gram, dtype=float)
    if gram.shape != (basis.size, basis.size):
        raise ValueError(f"Gram matrix must be {basis.size}x{basis.size}")
    acc: dict[tuple[int, ...], float] = {}
    mons = basis.monomials
    for a in range(basis.size):
        for b in range(basis.size):
            if gram[a, b]:
                e = tuple(x + y for x, y in zip(mons[a], mons[b]))
                acc[e] = acc.get(e, 0.0) + gram[a, b]
    return Polynomial(n, acc)
