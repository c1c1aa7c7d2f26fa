import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmopt.algo import maxcut_problem
from jmopt.bench.maxcut import SplitMix64, brute_force_maxcut, gen_maxcut
from jmopt.bench.oracle import brute_force_value_function, slice_minimum
from jmopt.bench.problems import (
    ProblemFile,
    ProblemSyntaxError,
    catalog,
    disconnected,
    format_problem,
    parse_problem,
    polytope_vertices,
    random_concave_qp,
    rescale_to_unit_box,
    unit_disk,
)
from jmopt.bench.reports import (
    fmt,
    maxcut_row,
    report_maxcut_batch,
    report_value_function,
    to_csv,
)
from jmopt.moments import Interval
from jmopt.poly import Polynomial
from jmopt.relax import SemialgebraicProblem, SignSet

MINIMAL = """nvars 1
objective
1 2
bounds 1 -1 1
"""


class TestParse:
    def test_minimal(self):
        pf = parse_problem(MINIMAL)
        x = Polynomial.variable(1, 0)
        assert pf.problem.f == x**2
        assert pf.problem.box == [Interval(-1, 1)]
        assert set(pf.problem.constraints) == {x + 1, 1 - x}

    def test_empty_constraint_section(self):
        pf = parse_problem("nvars 2\nobjective\n1 1 1\nconstraint\nbounds 1 0 1\nbounds 2 0 1\n")
        assert pf.problem.m == 5
        assert pf.problem.constraints[0].is_zero

    def test_full_file(self):
        text = """# comment
nvars 2
name demo
objective
1 1 0   # x1
-2 0 1
constraint
1 0 0
-1 2 0
-1 0 2
optimum -2.0
minimizer 0 1
"""
        pf = parse_problem(text)
        assert pf.name == "demo" and pf.optimum == -2.0
        np.testing.assert_array_equal(pf.minimizer, [0, 1])
        assert pf.problem.m == 1 and pf.problem.box is None

    @pytest.mark.parametrize(
        "text,line",
        [
            ("nvars 2\nobjective\n1 2\n", 3),
            ("nvars 1\nobjective\nx 2\n", 3),
            ("nvars 1\nobjective\n1 -2\n", 3),
            ("nvars 1\nobjective\n1 2\nbounds 2 0 1\n", 4),
            ("nvars 1\nobjective\n1 2\nbounds 1 1 0\n", 4),
            ("nvars 1\nnvars 2\n", 2),
            ("1 2\n", 1),
            ("nvars 1\nfoo\n", 2),
        ],
    )
    def test_errors_name_line(self, text, line):
        with pytest.raises(ProblemSyntaxError) as info:
            parse_problem(text)
        assert info.value.line == line
        assert f"line {line}" in str(info.value)

    def test_missing_sections(self):
        with pytest.raises(ProblemSyntaxError):
            parse_problem("nvars 1\n")
        with pytest.raises(ProblemSyntaxError):
            parse_problem("objective\n")

    def test_format_roundtrip(self):
        for entry in catalog().values():
            first = parse_problem(format_problem(ProblemFile(entry.problem, "x", entry.optimum)))
            text = format_problem(first)
            assert format_problem(parse_problem(text)) == text
            assert first.problem.f.allclose(entry.problem.f)
            assert set(entry.problem.constraints) <= set(first.problem.constraints)
            assert first.optimum == entry.optimum


class TestRescale:
    def test_pooling_box(self):
        x = [Polynomial.variable(9, j) for j in range(9)]
        prob = SemialgebraicProblem(9, sum(x, Polynomial.zero(9)), [], [Interval(0, 500)] * 9)
        scaled, bm = rescale_to_unit_box(prob)
        np.testing.assert_array_equal(bm.center, 250)
        np.testing.assert_array_equal(bm.radius, 250)
        assert all(b == Interval(-1, 1) for b in scaled.box)

    def test_identity_on_unit_box(self):
        prob = unit_disk().problem
        scaled, bm = rescale_to_unit_box(prob)
        assert scaled.f == prob.f and scaled.constraints == prob.constraints

    def test_missing_box(self):
        x = Polynomial.variable(1, 0)
        with pytest.raises(ValueError):
            rescale_to_unit_box(SemialgebraicProblem(1, x, []))

    @given(st.lists(st.tuples(st.floats(-50, 50), st.floats(0.01, 40)), min_size=1, max_size=4),
           st.data())
    def test_roundtrip_and_value(self, boxes, data):
        n = len(boxes)
        box = [Interval(lo, lo + w) for lo, w in boxes]
        xs = [Polynomial.variable(n, j) for j in range(n)]
        f = sum((xj**2 * (j + 1) - xj for j, xj in enumerate(xs)), Polynomial.zero(n))
        scaled, bm = rescale_to_unit_box(SemialgebraicProblem(n, f, [], box))
        u = np.array(data.draw(st.lists(st.floats(-1, 1), min_size=n, max_size=n)))
        x = bm.back(u)
        np.testing.assert_allclose(bm.back(bm.forward(x)), x, atol=1e-12 * max(1.0, np.abs(x).max()))
        assert scaled.f(u) == pytest.approx(f(x), rel=1e-9, abs=1e-9)


class TestMaxcutGenerator:
    def test_splitmix_reference(self):
        rng = SplitMix64(0)
        assert rng.next_u64() == 0xE220A8397B1DCDAF
        assert 0.0 <= SplitMix64(7).uniform() < 1.0

    def test_deterministic(self):
        a, b = gen_maxcut(12, 0.5, 3), gen_maxcut(12, 0.5, 3)
        np.testing.assert_array_equal(a.Q, b.Q)
        assert not np.array_equal(a.Q, gen_maxcut(12, 0.5, 4).Q)

    def test_frozen_instance(self):
        # regression guard for the documented generator stream
        inst = gen_maxcut(5, 0.5, 0)
        assert inst.edges == int(np.count_nonzero(np.triu(inst.Q, 1)))
        assert inst.Q.tolist() == gen_maxcut(5, 0.5, 0).Q.tolist()

    def test_shape(self):
        inst = gen_maxcut(6, 1.0, 1)
        assert np.array_equal(inst.Q, inst.Q.T)
        assert np.all(np.diag(inst.Q) == 0)
        assert inst.edges == 15

    def test_errors(self):
        with pytest.raises(ValueError):
            gen_maxcut(1)
        with pytest.raises(ValueError):
            gen_maxcut(4, 0.0)


class TestBruteForce:
    def test_two_nodes(self):
        assert brute_force_maxcut([[0, 1], [1, 0]])[0] == -2

    def test_zero(self):
        assert brute_force_maxcut(np.zeros((3, 3)))[0] == 0

    def test_path(self):
        Q = np.zeros((3, 3))
        Q[0, 1] = Q[1, 0] = Q[1, 2] = Q[2, 1] = 1
        cost, x = brute_force_maxcut(Q)
        assert cost == -4 and x == (1, -1, 1)

    def test_matches_full_enumeration(self, rng):
        import itertools

        Q = rng.normal(size=(6, 6))
        Q = Q + Q.T
        full = min(np.array(s) @ Q @ np.array(s) for s in itertools.product([-1, 1], repeat=6))
        assert brute_force_maxcut(Q)[0] == pytest.approx(full)

    def test_too_large(self):
        with pytest.raises(ValueError):
            brute_force_maxcut(np.zeros((23, 23)))


class TestOracle:
    def test_disk_value_function(self):
        e = unit_disk()
        vf = brute_force_value_function(e.problem, 0, Interval(-1, 1), 21)
        np.testing.assert_allclose(vf.values, e.value_functions[0](vf.grid), atol=1e-6)
        vf2 = brute_force_value_function(e.problem, 1, Interval(-1, 1), 21)
        np.testing.assert_allclose(vf2.values, vf2.grid, atol=1e-6)

    def test_empty_slices(self):
        e = disconnected()
        vf = brute_force_value_function(e.problem, 0, Interval(-1, 1), 11)
        assert np.all(np.isinf(vf.values[np.abs(vf.grid) < 0.5 - 1e-9]))
        assert np.all(vf.feasible[np.abs(vf.grid) >= 0.5])

    def test_needs_bounds(self):
        x = [Polynomial.variable(2, j) for j in range(2)]
        with pytest.raises(ValueError):
            slice_minimum(SemialgebraicProblem(2, x[0], [x[0]]), 5)

    def test_minimum_matches_optimum(self):
        for entry in catalog().values():
            for k, iv in enumerate(entry.intervals):
                vf = brute_force_value_function(entry.problem, k, iv, 41)
                m = vf.values[vf.feasible].min()
                assert m >= entry.optimum - 1e-4
                assert m <= entry.optimum + 0.05

    def test_concave_qp_vertex_optimum(self):
        pf = random_concave_qp(2, 5)
        prob = pf.problem
        assert prob.feasibility_residual(pf.minimizer) <= 1e-9
        assert prob.f(pf.minimizer) == pytest.approx(pf.optimum)
        # lattice scan never beats the vertex optimum
        assert slice_minimum(prob, 81) >= pf.optimum - 1e-9

    def test_polytope_vertices_square(self):
        A = np.vstack([np.eye(2), -np.eye(2)])
        V = polytope_vertices(A, np.ones(4))
        assert sorted(map(tuple, V)) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


class TestReports:
    def test_fmt(self):
        assert fmt(-0.0) == "0"
        assert fmt(1 / 3) == "0.3333333333"
        assert fmt(True) == "1" and fmt(np.int64(4)) == "4"
        assert fmt(math.inf) == "inf" and fmt(math.nan) == "nan"

    def test_csv(self):
        text = to_csv([(1, 0.5, "a,b")], ["x", "y", "z"])
        assert text == 'x,y,z\n1,0.5,"a,b"\n'

    def test_value_function_table(self):
        e = unit_disk()
        rows = report_value_function(e.problem, 0, Interval(-1, 1), [1, 2, 3], grid=21)
        assert [r.order for r in rows] == [1, 2, 3]
        l1 = [r.l1_error for r in rows]
        assert all(b <= a + 1e-6 for a, b in zip(l1, l1[1:]))
        assert all(r.max_violation <= 1e-6 for r in rows)
        assert all(r.l1_error_running <= r.l1_error + 1e-12 for r in rows)

    def test_parameter_only_exact(self):
        e = catalog()["parameter-quadratic"]
        rows = report_value_function(e.problem, 0, Interval(-1, 1), [1], grid=21)
        assert rows[0].l1_error <= 1e-6

    def test_maxcut_coordinate_affine(self):
        Q = gen_maxcut(4, 0.7, 2).Q
        rows = report_value_function(maxcut_problem(Q), 0, SignSet(), [1])
        assert rows[0].max_violation <= 1e-6

    def test_maxcut_batch(self):
        summary = report_maxcut_batch(4, 3, 0.5, 10)
        assert [r.seed for r in summary.rows] == [10, 11, 12]
        assert all(r.maxgap >= r.shor - 1e-6 for r in summary.rows)
        assert "instances=3" in summary.text()

    def test_parallel_batch_matches_serial(self):
        a = report_maxcut_batch(4, 3, 0.5, 0, jobs=1)
        b = report_maxcut_batch(4, 3, 0.5, 0, jobs=2)
        assert to_csv(a.rows) == to_csv(b.rows)

    def test_maxcut_row_without_brute(self):
        row = maxcut_row(gen_maxcut(4, 0.5, 1).Q, brute=False)
        assert math.isnan(row.optimum) and math.isnan(row.ratio_opt)
