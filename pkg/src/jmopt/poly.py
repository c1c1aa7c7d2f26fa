"""Sparse multivariate polynomials with real coefficients.

A :class:`Polynomial` maps exponent tuples to nonzero float coefficients.
Variables are addressed by 0-based index.  Instances are immutable; all
arithmetic returns new objects.

:func:`rank_monomials` provides the graded-lexicographic monomial order used
to index moment vectors and Gram matrices throughout the package.
"""
from __future__ import annotations

import math
from functools import lru_cache
from itertools import product
from numbers import Real
from typing import Iterable, Mapping, Sequence

import numpy as np

#: Coefficients with smaller magnitude are dropped after arithmetic.
PRUNE_TOL = 1e-14

Exponent = tuple[int, ...]


def _prune(terms: Mapping[Exponent, float]) -> dict[Exponent, float]:
    return {e: float(c) for e, c in terms.items() if abs(c) >= PRUNE_TOL}


class Polynomial:
    """Sparse polynomial in ``nvars`` variables.

    >>> x = Polynomial.variable(2, 0)
    >>> y = Polynomial.variable(2, 1)
    >>> (x**2 + 2 * y)([3.0, 1.0])
    11.0
    """

    __slots__ = ("_nvars", "_terms", "_hash", "_cache")

    def __init__(self, nvars: int, terms: Mapping[Sequence[int], float] | None = None):
        if nvars < 0:
            raise ValueError("nvars must be nonnegative")
        clean: dict[Exponent, float] = {}
        for exps, coeff in (terms or {}).items():
            e = tuple(int(a) for a in exps)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {nvars}")
            if any(a < 0 for a in e):
                raise ValueError(f"negative exponent in {e}")
            clean[e] = clean.get(e, 0.0) + float(coeff)
        self._nvars = nvars
        self._terms = _prune(clean)
        self._hash = None
        self._cache = None

    # -- constructors -----------------------------------------------------
    @classmethod
    def _raw(cls, nvars: int, terms: dict[Exponent, float]) -> "Polynomial":
        obj = cls.__new__(cls)
        obj._nvars = nvars
        obj._terms = _prune(terms)
        obj._hash = None
        obj._cache = None
        return obj

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls._raw(nvars, {})

    @classmethod
    def constant(cls, nvars: int, value: float) -> "Polynomial":
        return cls._raw(nvars, {(0,) * nvars: float(value)})

    @classmethod
    def variable(cls, nvars: int, j: int) -> "Polynomial":
        if not 0 <= j < nvars:
            raise IndexError(f"variable index {j} out of range for {nvars} variables")
        e = [0] * nvars
        e[j] = 1
        return cls._raw(nvars, {tuple(e): 1.0})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: float = 1.0) -> "Polynomial":
        return cls(len(exps), {tuple(exps): coeff})

    @classmethod
    def from_terms(cls, nvars: int, terms: Iterable[tuple[float, Sequence[int]]]) -> "Polynomial":
        """Build from ``(coefficient, exponents)`` pairs; repeated monomials add up."""
        acc: dict[Exponent, float] = {}
        for coeff, exps in terms:
            e = tuple(int(a) for a in exps)
            if len(e) != nvars:
                raise ValueError(f"exponent {e} has length {len(e)}, expected {nvars}")
            acc[e] = acc.get(e, 0.0) + float(coeff)
        return cls(nvars, acc)

    # -- basic properties -------------------------------------------------
    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def terms(self) -> dict[Exponent, float]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, exps: Sequence[int]) -> float:
        return self._terms.get(tuple(exps), 0.0)

    @property
    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(e) for e in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_constant(self) -> bool:
        return all(sum(e) == 0 for e in self._terms)

    def constant_term(self) -> float:
        return self._terms.get((0,) * self._nvars, 0.0)

    def variables(self) -> set[int]:
        """Indices of variables that actually occur."""
        return {j for e in self._terms for j, a in enumerate(e) if a}

    # -- arithmetic -------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other._nvars != self._nvars:
                raise ValueError(f"dimension mismatch: {self._nvars} vs {other._nvars} variables")
            return other
        if isinstance(other, Real):
            return Polynomial.constant(self._nvars, float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        acc = dict(self._terms)
        for e, c in other._terms.items():
            acc[e] = acc.get(e, 0.0) + c
        return Polynomial._raw(self._nvars, acc)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial._raw(self._nvars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        if isinstance(other, Real):
            return Polynomial._raw(self._nvars, {e: c * float(other) for e, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return multiply(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Real):
            return NotImplemented
        return self * (1.0 / float(other))

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only nonnegative integer powers are supported")
        result = Polynomial.constant(self._nvars, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._nvars == other._nvars and self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._nvars, frozenset(self._terms.items())))
        return self._hash

    def allclose(self, other: "Polynomial", atol: float = 1e-12) -> bool:
        return max_abs_coefficient(self - other) <= atol

    # -- evaluation -------------------------------------------------------
    def _arrays(self):
        if self._cache is None:
            if self._terms:
                exps = np.array(list(self._terms.keys()), dtype=np.int64).reshape(-1, self._nvars)
                coeffs = np.array(list(self._terms.values()), dtype=float)
            else:
                exps = np.zeros((0, self._nvars), dtype=np.int64)
                coeffs = np.zeros(0)
            self._cache = (exps, coeffs)
        return self._cache

    def __call__(self, x) -> float:
        return evaluate(self, x)

    def evaluate_many(self, points) -> np.ndarray:
        """Evaluate at each row of a ``(P, nvars)`` array."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self._nvars:
            raise ValueError(f"expected points of shape (P, {self._nvars}), got {pts.shape}")
        exps, coeffs = self._arrays()
        if not len(coeffs):
            return np.zeros(pts.shape[0])
        vals = np.ones((pts.shape[0], len(coeffs)))
        for j in range(self._nvars):
            col = exps[:, j]
            if col.any():
                vals *= pts[:, j : j + 1] ** col[None, :]
        return vals @ coeffs

    # -- calculus and substitution ---------------------------------------
    def derivative(self, j: int) -> "Polynomial":
        if not 0 <= j < self._nvars:
            raise IndexError(f"variable index {j} out of range")
        acc: dict[Exponent, float] = {}
        for e, c in self._terms.items():
            if e[j]:
                f = list(e)
                f[j] -= 1
                acc[tuple(f)] = acc.get(tuple(f), 0.0) + c * e[j]
        return Polynomial._raw(self._nvars, acc)

    def gradient(self) -> list["Polynomial"]:
        return [self.derivative(j) for j in range(self._nvars)]

    def substitute(self, k: int, value: float) -> "Polynomial":
        return substitute(self, k, value)

    def __repr__(self):
        return f"Polynomial({self._nvars}, {self.to_string()!r})"

    def to_string(self, names: Sequence[str] | None = None) -> str:
        if not self._terms:
            return "0"
        names = names or [f"x{j + 1}" for j in range(self._nvars)]
        order = rank_monomials(self._nvars, self.degree)
        parts = []
        for e in sorted(self._terms, key=order.rank):
            c = self._terms[e]
            mono = "*".join(
                names[j] if a == 1 else f"{names[j]}^{a}" for j, a in enumerate(e) if a
            )
            if not mono:
                parts.append(f"{c:+.6g}")
            elif c == 1.0:
                parts.append(f"+{mono}")
            elif c == -1.0:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c:+.6g}*{mono}")
        s = " ".join(parts)
        return s[1:] if s.startswith("+") else s


def evaluate(p: Polynomial, x) -> float:
    """Value of ``p`` at the point ``x`` (a sequence of length ``p.nvars``)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != p.nvars:
        raise ValueError(f"point has length {x.shape[0]}, polynomial has {p.nvars} variables")
    total = 0.0
    for e, c in p.items():
        term = c
        for xj, a in zip(x, e):
            if a:
                term *= xj**a
        total += term
    return float(total)


def multiply(p: Polynomial, q: Polynomial) -> Polynomial:
    if p.nvars != q.nvars:
        raise ValueError(f"dimension mismatch: {p.nvars} vs {q.nvars} variables")
    acc: dict[Exponent, float] = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            acc[e] = acc.get(e, 0.0) + c1 * c2
    return Polynomial._raw(p.nvars, acc)


def substitute(p: Polynomial, k: int, value: float) -> Polynomial:
    """Replace variable ``k`` by the constant ``value``.

    The result has ``p.nvars - 1`` variables; variable ``k`` is removed and
    the ones after it shift down by one.
    """
    if not 0 <= k < p.nvars:
        raise IndexError(f"variable index {k} out of range for {p.nvars} variables")
    acc: dict[Exponent, float] = {}
    for e, c in p.items():
        rest = e[:k] + e[k + 1 :]
        acc[rest] = acc.get(rest, 0.0) + c * float(value) ** e[k]
    return Polynomial._raw(p.nvars - 1, acc)


def substitute_prefix(p: Polynomial, values: Sequence[float]) -> Polynomial:
    """Fix the leading variables ``x_0 .. x_{len(values)-1}``."""
    for v in values:
        p = substitute(p, 0, v)
    return p


def affine_change(p: Polynomial, shift: Sequence[float], scale: Sequence[float]) -> Polynomial:
    """Return ``p(shift + scale * u)`` as a polynomial in ``u``."""
    n = p.nvars
    if len(shift) != n or len(scale) != n:
        raise ValueError("shift and scale must have one entry per variable")
    # powers[j][a] = (shift_j + scale_j * u_j)^a as a list of univariate coefficients
    deg = p.degree
    powers = []
    for c0, r in zip(shift, scale):
        row = [[1.0]]
        for _ in range(deg):
            prev = row[-1]
            nxt = [0.0] * (len(prev) + 1)
            for i, v in enumerate(prev):
                nxt[i] += v * c0
                nxt[i + 1] += v * r
            row.append(nxt)
        powers.append(row)
    acc: dict[Exponent, float] = {}
    for e, c in p.items():
        factors = [powers[j][a] for j, a in enumerate(e)]
        for idx in product(*(range(len(f)) for f in factors)):
            w = c
            for f, i in zip(factors, idx):
                w *= f[i]
            if w:
                acc[idx] = acc.get(idx, 0.0) + w
    return Polynomial._raw(n, acc)


def embed(p: Polynomial, nvars: int, positions: Sequence[int]) -> Polynomial:
    """Re-express ``p`` in a larger variable set; variable ``j`` of ``p`` goes to ``positions[j]``."""
    if len(positions) != p.nvars:
        raise ValueError("need one target position per variable")
    acc = {}
    for e, c in p.items():
        f = [0] * nvars
        for j, a in zip(positions, e):
            f[j] += a
        acc[tuple(f)] = acc.get(tuple(f), 0.0) + c
    return Polynomial._raw(nvars, acc)


def max_abs_coefficient(p: Polynomial) -> float:
    return max((abs(c) for _, c in p.items()), default=0.0)


class MonomialOrder:
    """Graded lexicographic ranking of all monomials of degree ``<= max_degree``.

    Degrees ascend; inside a degree, exponent vectors are sorted in
    decreasing lexicographic order, so for two variables the sequence is
    ``1, x1, x2, x1^2, x1*x2, x2^2, ...``.
    """

    def __init__(self, n: int, max_degree: int):
        if n < 0 or max_degree < 0:
            raise ValueError("n and max_degree must be nonnegative")
        self.n = n
        self.max_degree = max_degree
        mons: list[Exponent] = []
        for d in range(max_degree + 1):
            mons.extend(_monomials_of_degree(n, d))
        self.monomials: tuple[Exponent, ...] = tuple(mons)
        self._index = {m: i for i, m in enumerate(mons)}
        self._exps = np.array(mons, dtype=np.int64).reshape(len(mons), n)

    @property
    def size(self) -> int:
        return len(self.monomials)

    def __len__(self) -> int:
        return len(self.monomials)

    def rank(self, alpha: Sequence[int]) -> int:
        try:
            return self._index[tuple(alpha)]
        except KeyError:
            raise KeyError(f"monomial {tuple(alpha)} not in order (n={self.n}, d={self.max_degree})") from None

    def unrank(self, r: int) -> Exponent:
        return self.monomials[r]

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self._index

    def count(self, degree: int) -> int:
        """Number of monomials with total degree at most ``degree``."""
        return math.comb(self.n + degree, degree)

    @property
    def exponents(self) -> np.ndarray:
        return self._exps

    def vector(self, x) -> np.ndarray:
        """Monomial vector ``(x^alpha)`` in rank order."""
        x = np.asarray(x, dtype=float)
        return np.prod(x[None, :] ** self._exps, axis=1)


def _monomials_of_degree(n: int, d: int) -> list[Exponent]:
    if n == 0:
        return [()] if d == 0 else []
    if n == 1:
        return [(d,)]
    out = []
    for a in range(d, -1, -1):
        for rest in _monomials_of_degree(n - 1, d - a):
            out.append((a,) + rest)
    return out


@lru_cache(maxsize=256)
def rank_monomials(n: int, d: int) -> MonomialOrder:
    """Cached graded-lex order for ``n`` variables up to degree ``d``."""
    return MonomialOrder(n, d)


def monomial_count(n: int, d: int) -> int:
    return math.comb(n + d, d)
