import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmopt.moments import Interval
from jmopt.univar import companion_matrix, minimize_on_interval, real_roots


def test_square():
    m = minimize_on_interval([0, 0, 1], Interval(-1, 2))
    assert m.argmin == 0 and m.value == 0


def test_endpoint():
    m = minimize_on_interval([0, -1], Interval(0, 1))
    assert m.argmin == 1 and m.value == -1


def test_double_well_tie():
    m = minimize_on_interval([0, 0, -1, 0, 1], Interval(-2, 2))
    r = 1 / np.sqrt(2)
    assert m.argmin == pytest.approx(-r, abs=1e-12)
    assert m.value == pytest.approx(-0.25, abs=1e-14)
    assert len(m.all_minimizers) == 2
    assert m.all_minimizers[1] == pytest.approx(r, abs=1e-12)


def test_constant_picks_lo():
    m = minimize_on_interval([3.0], Interval(-0.5, 4))
    assert m.argmin == -0.5 and m.value == 3


def test_negative_zero_normalized():
    m = minimize_on_interval([0, 0, 1], Interval(-1, 1))
    assert np.copysign(1.0, m.argmin) == 1.0


def test_degenerate_interval():
    with pytest.raises(ValueError):
        minimize_on_interval([0, 1], Interval(1, 1))


def test_nonfinite_coefficients():
    with pytest.raises(ValueError):
        minimize_on_interval([0, np.nan], Interval(0, 1))


def test_tiny_leading_coefficient_trimmed():
    # 1e-15 y^3 would otherwise put a root near 1e15 / 3
    m = minimize_on_interval([0, -2, 1, 1e-15], Interval(-10, 10))
    assert m.argmin == pytest.approx(1.0, abs=1e-9)


def test_companion_roots():
    C = companion_matrix([-6, 11, -6, 1])  # (y-1)(y-2)(y-3)
    np.testing.assert_allclose(np.sort(np.linalg.eigvals(C).real), [1, 2, 3], atol=1e-10)
    np.testing.assert_allclose(real_roots([1, 0, 1]), [])
    with pytest.raises(ValueError):
        companion_matrix([1.0])


coeff_lists = st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=9)


@given(coeff_lists, st.floats(-3, 3), st.floats(0.01, 4))
def test_not_beaten_by_samples(coeffs, lo, width):
    iv = Interval(lo, lo + width)
    m = minimize_on_interval(coeffs, iv)
    assert iv.lo <= m.argmin <= iv.hi
    assert m.value == pytest.approx(np.polynomial.polynomial.polyval(m.argmin, coeffs), abs=1e-12)
    ys = np.random.default_rng(0).uniform(iv.lo, iv.hi, 1000)
    vals = np.polynomial.polynomial.polyval(ys, coeffs)
    assert m.value <= vals.min() + 1e-9 * max(1.0, abs(vals.min()))


@given(coeff_lists, st.floats(-3, 3), st.floats(0.01, 4))
def test_matches_grid_scan(coeffs, lo, width):
    iv = Interval(lo, lo + width)
    m = minimize_on_interval(coeffs, iv)
    grid = np.polynomial.polynomial.polyval(iv.grid(10_000), coeffs)
    # the grid can only overshoot the true minimum by its resolution
    slope = np.abs(np.polynomial.polynomial.polyval(iv.grid(10_000), np.polynomial.polynomial.polyder(coeffs))).max() if len(coeffs) > 1 else 0.0
    assert m.value <= grid.min() + 1e-9 * max(1.0, abs(grid.min()))
    assert grid.min() - m.value <= max(1e-6, slope * iv.width / 9_999)


@given(coeff_lists, st.floats(-3, 3), st.floats(0.01, 4))
def test_argmin_smallest_of_ties(coeffs, lo, width):
    m = minimize_on_interval(coeffs, Interval(lo, lo + width))
    assert m.argmin == min(m.all_minimizers)
    assert list(m.all_minimizers) == sorted(m.all_minimizers)
