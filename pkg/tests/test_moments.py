import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmopt.moments import (
    AffineMatrixMap,
    Interval,
    MomentVector,
    apply,
    gram_polynomial,
    localizing_matrix_map,
    moment_matrix_map,
    uniform_moments,
)
from jmopt.poly import Polynomial, rank_monomials


def gauss_legendre_moments(lo, hi, max_deg, nodes=24):
    t, w = np.polynomial.legendre.leggauss(nodes)
    y = 0.5 * (hi - lo) * t + 0.5 * (hi + lo)
    return np.array([0.5 * w @ y**l for l in range(max_deg + 1)])


class TestInterval:
    def test_basic(self):
        iv = Interval(-1.0, 3.0)
        assert iv.width == 4 and iv.midpoint == 1
        assert iv.contains(3.0) and not iv.contains(3.1)
        assert iv.clamp(5.0) == 3.0 and iv.clamp(-2) == -1
        left, right = iv.bisect()
        assert (left.lo, left.hi, right.lo, right.hi) == (-1, 1, 1, 3)
        assert str(iv) == "[-1, 3]"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            Interval(1.0, 0.0)
        with pytest.raises(ValueError):
            Interval(0.0, float("inf"))


class TestUniformMoments:
    def test_symmetric(self):
        np.testing.assert_allclose(uniform_moments(Interval(-1, 1), 2), [1, 0, 1 / 3], atol=1e-15)

    def test_unit_interval(self):
        np.testing.assert_allclose(uniform_moments(Interval(0, 1), 3), [1, 1 / 2, 1 / 3, 1 / 4], rtol=1e-15)

    def test_mean_is_midpoint(self):
        assert uniform_moments(Interval(1, 3), 1)[1] == pytest.approx(2.0, rel=1e-15)

    def test_degenerate(self):
        with pytest.raises(ValueError):
            uniform_moments(Interval(1.0, 1.0), 2)

    def test_narrow_interval_far_from_zero(self):
        beta = uniform_moments(Interval(1000.0, 1000.001), 4)
        ref = gauss_legendre_moments(1000.0, 1000.001, 4)
        np.testing.assert_allclose(beta, ref, rtol=1e-13)

    @given(st.floats(-5, 5), st.floats(1e-3, 6), st.integers(0, 20))
    def test_matches_quadrature(self, lo, width, deg):
        hi = lo + width
        beta = uniform_moments(Interval(lo, hi), deg)
        ref = gauss_legendre_moments(lo, hi, deg)
        scale = max(1.0, abs(lo), abs(hi)) ** np.arange(deg + 1)
        assert np.all(np.abs(beta - ref) <= 1e-12 * scale)


class TestMomentMatrix:
    def test_unit_interval_moments(self):
        M = apply(moment_matrix_map(1, 1), [1, 1 / 2, 1 / 3])
        np.testing.assert_allclose(M, [[1, 0.5], [0.5, 1 / 3]])

    def test_symmetric_moments_positive(self):
        M = apply(moment_matrix_map(1, 1), [1, 0, 1 / 3])
        np.testing.assert_allclose(M, np.diag([1, 1 / 3]))
        assert np.linalg.eigvalsh(M).min() > 0

    def test_cross_entry_reads_mixed_moment(self):
        amap = moment_matrix_map(2, 1)
        assert amap.size == 3
        order = rank_monomials(2, 2)
        assert amap.linear_form(1, 2) == {order.rank((1, 1)): 1.0}

    def test_entries_are_symmetric(self):
        M = apply(moment_matrix_map(2, 2), np.arange(15, dtype=float))
        np.testing.assert_array_equal(M, M.T)

    def test_short_vector(self):
        with pytest.raises(ValueError):
            apply(moment_matrix_map(2, 1), [1.0, 0.0])

    def test_psd_for_true_measure(self, rng):
        pts = rng.uniform(-1, 1, size=(40, 3))
        z = MomentVector.from_points(pts, 2)
        M = apply(moment_matrix_map(3, 2), z)
        assert np.linalg.eigvalsh(M).min() > -1e-12
        assert z.values[0] == pytest.approx(1.0)


class TestLocalizing:
    def test_scalar_block(self):
        x = Polynomial.variable(1, 0)
        L = apply(localizing_matrix_map(x - x**2, 0), [1, 1 / 2, 1 / 3])
        assert L.shape == (1, 1) and L[0, 0] == pytest.approx(1 / 6)

    def test_psd_on_support(self, rng):
        x1, x2 = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
        g = 1 - x1**2 - x2**2
        theta = rng.uniform(0, 2 * np.pi, 30)
        r = np.sqrt(rng.uniform(0, 1, 30))
        z = MomentVector.from_points(np.c_[r * np.cos(theta), r * np.sin(theta)], 2)
        L = apply(localizing_matrix_map(g, 1), z)
        assert np.linalg.eigvalsh(L).min() > -1e-12

    def test_riesz(self):
        x = Polynomial.variable(1, 0)
        z = MomentVector(1, 1, [1, 0.5, 1 / 3])
        assert z.riesz(x - x**2) == pytest.approx(1 / 6)
        with pytest.raises(ValueError):
            z.riesz(x**3)

    def test_gram_polynomial_roundtrip(self):
        G = np.array([[1.0, 0.5], [0.5, 2.0]])
        x = Polynomial.variable(1, 0)
        assert gram_polynomial(G, 1, 1).allclose(1 + x + 2 * x**2)

    def test_map_validation(self):
        with pytest.raises(ValueError):
            AffineMatrixMap(2, ((1, 0, 0, 1.0),))
