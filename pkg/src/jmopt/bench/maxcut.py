"""MAXCUT instances: a portable seeded generator and an exhaustive oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
MAX_BRUTE_FORCE = 22


class SplitMix64:
    """64-bit SplitMix generator; identical streams on every platform.

    ``state += 0x9E3779B97F4A7C15``, then the output is mixed with two
    xor-shift-multiply rounds (constants ``0xBF58476D1CE4E5B9`` and
    ``0x94D049BB133111EB``) and a final ``z ^ (z >> 31)``.
    """

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def uniform(self) -> float:
        """Uniform double in ``[0, 1)`` from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


@dataclass
class MaxcutInstance:
    n: int
    Q: np.ndarray
    seed: int

    @property
    def edges(self) -> int:
        return int(np.count_nonzero(np.triu(self.Q, 1)))


def gen_maxcut(n: int, density: float = 0.5, seed: int = 0) -> MaxcutInstance:
    """Random graph with unit weights: each pair ``i < j`` is an edge with probability ``density``.

    Pairs are visited row by row (``(0,1), (0,2), ..., (1,2), ...``), one
    uniform draw each.
    """
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 0 < density <= 1:
        raise ValueError("density must be in (0, 1]")
    rng = SplitMix64(seed)
    Q = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if rng.uniform() < density:
                Q[i, j] = Q[j, i] = 1.0
    return MaxcutInstance(n, Q, seed)


def brute_force_maxcut(Q) -> tuple[float, tuple[int, ...]]:
    """Exhaustive ``min x'Qx`` over ``{-1, 1}^n`` with ``x_1 = 1`` (the cost is even in x).

    Ties keep the first sign vector in enumeration order.
    """
    Q = np.asarray(Q, dtype=float)
    n = Q.shape[0]
    if n > MAX_BRUTE_FORCE:
        raise ValueError(f"brute force limited to n <= {MAX_BRUTE_FORCE}")
    if n == 0:
        return 0.0, ()
    best, best_x = np.inf, None
    # enumerate the remaining n-1 signs in chunks to bound memory
    m = n - 1
    chunk = 1 << min(m, 16)
    for start in range(0, 1 << m, chunk):
        idx = np.arange(start, min(start + chunk, 1 << m), dtype=np.int64)
        bits = (idx[:, None] >> np.arange(m)[None, :]) & 1
        X = np.hstack([np.ones((len(idx), 1)), 1.0 - 2.0 * bits])
        vals = np.einsum("pi,ij,pj->p", X, Q, X)
        a = int(np.argmin(vals))
        if vals[a] < best - 1e-12:
            best, best_x = float(vals[a]), tuple(int(v) for v in X[a])
    return best, best_x
