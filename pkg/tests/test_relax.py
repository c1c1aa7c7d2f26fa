import math
import warnings

import numpy as np
import pytest

from jmopt import conic
from jmopt.algo import maxcut_problem
from jmopt.conic import Status
from jmopt.moments import Interval, apply
from jmopt.poly import Polynomial
from jmopt.relax import (
    InfeasibleFixing,
    OrderTooSmall,
    SemialgebraicProblem,
    SignSet,
    archimedean_evident,
    ball_constraint,
    box_products,
    build_parametric,
    build_parametric_fixed_prefix,
    build_standard,
    extract_value_poly,
    solve_parametric,
    solve_relaxation,
    solve_standard,
    split_constraints,
    with_archimedean_guard,
)
from jmopt.bench.problems import box_quadratic, parameter_only, unit_disk


def xs(n):
    return [Polynomial.variable(n, j) for j in range(n)]


def disk(box=True):
    x1, x2 = xs(2)
    return SemialgebraicProblem(2, x2, [1 - x1**2 - x2**2], [Interval(-1, 1)] * 2 if box else None)


class TestProblem:
    def test_dimension_checks(self):
        with pytest.raises(ValueError):
            SemialgebraicProblem(2, Polynomial.variable(1, 0))
        with pytest.raises(ValueError):
            SemialgebraicProblem(1, Polynomial.variable(1, 0), [Polynomial.variable(2, 0)])

    def test_residual_and_orders(self):
        p = disk()
        assert p.feasibility_residual([0, 0]) == 0
        assert p.feasibility_residual([1, 1]) == pytest.approx(1.0)
        assert p.min_order() == 1 and p.degree == 2 and not p.is_polytope()

    def test_inferred_box(self):
        (x,) = xs(1)
        p = SemialgebraicProblem(1, x, [x + 2, 3 - x])
        (b,) = p.inferred_box()
        assert (b.lo, b.hi) == (-2, 3)

    def test_fix_drops_satisfied_constant(self):
        x1, x2 = xs(2)
        p = SemialgebraicProblem(2, x1 + x2, [1 - x1, x2 + 1])
        q = p.fix(0, 0.5)
        assert q.n == 1 and q.m == 1

    def test_fix_negative_constant(self):
        x1, x2 = xs(2)
        p = SemialgebraicProblem(2, x2, [1 - x1])
        with pytest.raises(InfeasibleFixing):
            p.fix(0, 2.0)

    def test_fix_outside_disk(self):
        with pytest.raises(InfeasibleFixing):
            disk().fix(0, 2.0)

    def test_tiny_negative_constant_warns(self):
        x1, x2 = xs(2)
        p = SemialgebraicProblem(2, x2, [1 - x1])
        with pytest.warns(UserWarning):
            p.fix(0, 1.0 + 1e-11)


class TestStructure:
    def test_split_pairs(self):
        (x,) = xs(1)
        ineq, eq = split_constraints([x**2 - 1, x, 1 - x**2])
        assert eq == [x**2 - 1] and ineq == [x]

    def test_archimedean(self):
        assert archimedean_evident(disk())
        x1, x2 = xs(2)
        assert not archimedean_evident(SemialgebraicProblem(2, x1, [x1, 1 - x1, x2, 1 - x2]))
        assert archimedean_evident(maxcut_problem(np.eye(2)))

    def test_ball_from_box(self):
        p = SemialgebraicProblem(2, xs(2)[0], [], [Interval(-1, 2), Interval(0, 3)])
        g = ball_constraint(p)
        assert g.constant_term() == pytest.approx(4 + 9)

    def test_box_products_only_for_missing(self):
        x1, x2 = xs(2)
        p = SemialgebraicProblem(2, x1, [x1, 1 - x1, 1 - x2**2], [Interval(0, 1), Interval(-1, 1)])
        prods = box_products(p)
        assert len(prods) == 1
        assert prods[0].allclose((1 - x1) * x1)

    def test_guard_keeps_evident_problem(self):
        p = disk()
        assert with_archimedean_guard(p) is p


class TestBuildParametric:
    def test_disk_structure(self):
        prog = build_parametric(disk(box=False), 0, Interval(-1, 1), 1)
        assert prog.nvar == 6
        sizes = sorted(b.size for b in prog.psd_blocks)
        assert sizes == [1, 3]
        rhs = {lab: b for lab, (_, b) in zip(prog.equality_labels, prog.equalities)}
        assert rhs == pytest.approx({"marginal:0": 1.0, "marginal:1": 0.0, "marginal:2": 1 / 3})

    def test_order_too_small(self):
        x1, x2 = xs(2)
        p = SemialgebraicProblem(2, x1**4 + x2, [1 - x1**2 - x2**2])
        with pytest.raises(OrderTooSmall):
            build_parametric(p, 0, Interval(-1, 1), 1)
        with pytest.raises(OrderTooSmall):
            build_standard(disk(), 0)

    def test_bad_coordinate(self):
        with pytest.raises(IndexError):
            build_parametric(disk(), 2, Interval(-1, 1), 1)

    def test_sign_set_marginal(self):
        prog = build_parametric(maxcut_problem(np.eye(2)), 0, SignSet(), 1, degrees=(0, 1))
        assert [l for l in prog.equality_labels if l.startswith("marginal")] == ["marginal:0", "marginal:1"]


class TestStandard:
    def test_disk_minimum(self):
        res = solve_standard(disk(), 1)
        assert res.status is Status.OPTIMAL
        assert res.primal_value == pytest.approx(-1, abs=1e-7)

    def test_maxcut_shor_two_nodes(self):
        res = solve_standard(maxcut_problem(np.array([[0.0, 1.0], [1.0, 0.0]])), 1)
        assert res.primal_value == pytest.approx(-2, abs=1e-7)

    def test_convex_square(self):
        (x,) = xs(1)
        p = SemialgebraicProblem(1, x**2, [1 - x**2])
        assert solve_standard(p, 1).primal_value == pytest.approx(0, abs=1e-7)


class TestFixedPrefix:
    def test_disk_fix_first(self):
        prog = build_parametric_fixed_prefix(disk(), [0.0], Interval(-1, 1), 1)
        res = solve_relaxation(prog, 0, Interval(-1, 1), 1)
        assert res.primal_value == pytest.approx(0.0, abs=1e-7)
        ys = np.linspace(-1, 1, 21)
        assert np.max(res.value_poly(ys) - ys) <= 1e-6

    def test_infeasible_prefix(self):
        with pytest.raises(InfeasibleFixing):
            build_parametric_fixed_prefix(disk(), [2.0], Interval(-1, 1), 1)

    def test_empty_prefix_matches_plain(self):
        a = build_parametric_fixed_prefix(disk(), [], Interval(-1, 1), 1)
        b = build_parametric(disk(), 0, Interval(-1, 1), 1)
        assert a.equalities == b.equalities and a.objective == b.objective

    def test_prefix_too_long(self):
        with pytest.raises(ValueError):
            build_parametric_fixed_prefix(disk(), [0.0, 0.0], Interval(-1, 1), 1)


class TestValuePolynomial:
    def test_disk_lower_bound(self):
        res = solve_parametric(disk(), 0, Interval(-1, 1), 2)
        ys = np.linspace(-1, 1, 101)
        J = -np.sqrt(1 - ys**2)
        assert np.max(res.value_poly(ys) - J) <= 1e-6
        assert res.value_poly.degree <= 4

    def test_parameter_only_recovery(self):
        entry = parameter_only()
        res = solve_parametric(entry.problem, 0, Interval(0, 1), 1)
        ys = np.linspace(0, 1, 11)
        np.testing.assert_allclose(res.value_poly(ys), ys, atol=1e-6)
        assert res.value_poly.mean() == pytest.approx(0.5, abs=1e-7)

    def test_dual_sum_matches_solver(self):
        res = solve_parametric(disk(), 0, Interval(-1, 1), 2)
        assert res.value_poly.dual_obj == pytest.approx(res.dual_value, abs=1e-7)
        assert res.dual_value <= res.primal_value + 1e-7

    def test_maxcut_affine(self):
        Q = np.array([[0, 1, 1], [1, 0, 0], [1, 0, 0]], dtype=float)
        res = solve_parametric(maxcut_problem(Q), 0, SignSet(), 1, degrees=(0, 1))
        assert len(res.value_poly.coeffs) == 2

    def test_certificate_and_psd(self):
        for entry in (unit_disk(), box_quadratic()):
            for i in (1, 2):
                res = solve_parametric(entry.problem, 0, entry.intervals[0], i)
                assert res.status is Status.OPTIMAL
                assert res.certificate_residual <= 1e-6
                for blk in res.program.psd_blocks:
                    assert np.linalg.eigvalsh(apply(blk, res.solution.primal_z)).min() >= -1e-8

    def test_extract_requires_usable(self):
        prog = build_parametric(disk(), 0, Interval(-1, 1), 1)
        sol = conic.solve(prog, conic.SolverOptions(max_iter=1))
        with pytest.raises(ValueError):
            extract_value_poly(prog, sol, 0, Interval(-1, 1), 1)

    def test_empty_slices_infeasible(self):
        x1, x2 = xs(2)
        p = SemialgebraicProblem(2, x1, [x1**2 - 0.25, 1 - x1**2, 1 - x2**2])
        # up to degree 4 the uniform moments are matched by a measure on |y| >= 1/2
        assert solve_parametric(p, 0, Interval(-1, 1), 2).feasible
        res = solve_parametric(p, 0, Interval(-1, 1), 3)
        assert res.status is Status.INFEASIBLE and not res.feasible
        ok = solve_parametric(p, 0, Interval(-1, -0.5), 3)
        assert ok.feasible
