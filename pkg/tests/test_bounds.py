import numpy as np
import pytest

from jmopt.bounds import ProjectionError, projection, projection_box, projection_polytope, projection_sdp
from jmopt.moments import Interval
from jmopt.poly import Polynomial
from jmopt.relax import SemialgebraicProblem
from jmopt.bench.problems import random_concave_qp, unit_disk


def xs(n):
    return [Polynomial.variable(n, j) for j in range(n)]


def unit_box():
    x1, x2 = xs(2)
    return SemialgebraicProblem(2, x1 + x2, [x1, 1 - x1, x2, 1 - x2])


def simplex():
    x1, x2 = xs(2)
    return SemialgebraicProblem(2, x1, [x1, x2, 1 - x1 - x2])


def close(iv, lo, hi, tol=1e-8):
    return abs(iv.lo - lo) <= tol and abs(iv.hi - hi) <= tol


def test_box_lp():
    assert close(projection_polytope(unit_box(), 0), 0, 1)


def test_simplex_lp():
    assert close(projection_polytope(simplex(), 1), 0, 1)


def test_outward_rounding():
    iv = projection_polytope(simplex(), 1)
    assert iv.lo <= 0 and iv.hi >= 1


def test_empty_polytope():
    (x,) = xs(1)
    with pytest.raises(ProjectionError):
        projection_polytope(SemialgebraicProblem(1, x, [x, -1 - x]), 0)


def test_unbounded_coordinate():
    x1, x2 = xs(2)
    with pytest.raises(ProjectionError):
        projection_polytope(SemialgebraicProblem(2, x1, [x1, x2, 1 - x2]), 0)


def test_nonaffine_rejected():
    with pytest.raises(ValueError):
        projection_polytope(unit_disk().problem, 0)


def test_disk_sdp():
    assert close(projection_sdp(unit_disk().problem, 0, 1), -1, 1, 1e-6)


def test_box_metadata_clamps():
    x1, x2 = xs(2)
    p = SemialgebraicProblem(2, x2, [4 - x1**2 - x2**2], [Interval(-0.5, 1.0), None])
    iv = projection_sdp(p, 0, 1)
    assert iv.lo >= -0.5 and iv.hi <= 1.0
    assert close(projection_sdp(p, 1, 1), -2, 2, 1e-6)


@pytest.mark.parametrize("seed", range(4))
def test_sdp_contains_lp(seed):
    prob = random_concave_qp(3, seed).problem
    for k in range(3):
        lp = projection_polytope(prob, k)
        sdp = projection_sdp(prob, k, 1)
        assert sdp.lo <= lp.lo + 1e-6 and sdp.hi >= lp.hi - 1e-6
        assert abs(sdp.width - lp.width) <= 1e-6


def test_dispatch_and_box():
    assert close(projection(unit_box(), 1), 0, 1)
    ivs = projection_box(unit_disk().problem)
    assert all(close(iv, -1, 1, 1e-6) for iv in ivs)
