"""Global minimization of a univariate polynomial on a closed interval.

Candidates are the interval endpoints plus the real roots of the
derivative inside the interval; roots come from the eigenvalues of the
companion matrix of the monic derivative.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .moments import Interval

TIE_TOL = 1e-9
TRIM_TOL = 1e-12
IMAG_TOL = 1e-7


@dataclass(frozen=True)
class UnivariateMinimum:
    argmin: float
    value: float
    all_minimizers: tuple[float, ...]


def _coeffs(p) -> np.ndarray:
    """Ascending coefficients from a ValuePolynomial or a raw sequence."""
    c = getattr(p, "coeffs", p)
    c = np.atleast_1d(np.asarray(c, dtype=float))
    if not np.all(np.isfinite(c)):
        raise ValueError("polynomial coefficients must be finite")
    return c


def companion_matrix(coeffs) -> np.ndarray:
    """Companion matrix of ``sum_l coeffs[l] y^l`` (leading coefficient nonzero)."""
    c = np.asarray(coeffs, dtype=float)
    d = len(c) - 1
    if d < 1 or c[-1] == 0:
        raise ValueError("companion matrix needs a nonzero leading coefficient and degree >= 1")
    C = np.zeros((d, d))
    C[1:, :-1] = np.eye(d - 1)
    C[:, -1] = -c[:-1] / c[-1]
    return C


def _trim(c: np.ndarray) -> np.ndarray:
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))
    end = len(c)
    while end > 1 and abs(c[end - 1]) < TRIM_TOL * scale:
        end -= 1
    return c[:end]


def real_roots(coeffs, tol: float = IMAG_TOL) -> np.ndarray:
    c = _trim(np.asarray(coeffs, dtype=float))
    if len(c) < 2:
        return np.zeros(0)
    ev = np.linalg.eigvals(companion_matrix(c))
    keep = np.abs(ev.imag) <= tol * np.maximum(1.0, np.abs(ev.real))
    return np.sort(ev.real[keep])


def _polish(c: np.ndarray, dc: np.ndarray, r: float) -> float:
    # one or two Newton steps on p' sharpen eigenvalue roots
    ddc = np.polynomial.polynomial.polyder(c, 2) if len(c) > 2 else np.zeros(1)
    for _ in range(2):
        h = np.polynomial.polynomial.polyval(r, ddc)
        if h == 0:
            break
        step = np.polynomial.polynomial.polyval(r, dc) / h
        if not np.isfinite(step) or abs(step) > 1e-3 * max(1.0, abs(r)):
            break
        r -= step
    return r


def minimize_on_interval(p, iv: Interval, tie_tol: float = TIE_TOL) -> UnivariateMinimum:
    """Global minimum of ``p`` over ``iv``; ties within ``tie_tol`` keep the smallest argmin."""
    if not iv.hi > iv.lo:
        raise ValueError(f"degenerate interval {iv}")
    c = _trim(_coeffs(p))
    cand = [iv.lo, iv.hi]
    if len(c) > 2:
        dc = np.polynomial.polynomial.polyder(c)
        for r in real_roots(dc):
            r = _polish(c, dc, float(r))
            if iv.lo < r < iv.hi:
                cand.append(r)
    cand = np.array(sorted(cand))
    vals = np.polynomial.polynomial.polyval(cand, c)
    best = float(vals.min())
    tol = tie_tol * max(1.0, abs(best))
    mins = tuple(float(x) + 0.0 for x, v in zip(cand, vals) if v <= best + tol)
    arg = mins[0]
    return UnivariateMinimum(arg, float(np.polynomial.polynomial.polyval(arg, c)), mins)
