import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipnav.constraints import LinearRow
from lipnav.qp import INFEASIBLE, MAX_ITERATIONS, OPTIMAL, DenseQP, solve, solve_with_slack
from oracles import kkt_check, projected_gradient_qp, random_feasible_qp


def _qp(H, g, A=(), lo=(), hi=()):
    rows = [LinearRow(np.asarray(a, float), l, u, f"r{i}") for i, (a, l, u) in enumerate(zip(A, lo, hi))]
    return DenseQP(np.asarray(H, float), np.asarray(g, float), rows)


def _arrays(qp):
    A, lo, hi = qp.matrix()
    return qp.hessian, qp.gradient, A, lo, hi


class TestBasics:
    def test_unconstrained_origin(self):
        sol = solve(_qp(np.eye(3) * 2, np.zeros(3)))
        assert sol.status == OPTIMAL
        np.testing.assert_array_equal(sol.u_star, np.zeros(3))
        assert sol.objective == 0.0

    def test_single_active_bound(self):
        # (u - 1)^2 = u^2 - 2u + 1
        sol = solve(_qp([[2.0]], [-2.0], [[1.0]], [-math.inf], [0.5]))
        assert sol.status == OPTIMAL
        assert sol.u_star[0] == pytest.approx(0.5)
        assert sol.active_set == [0]
        assert sol.multipliers[0] == pytest.approx(-1.0)  # upper side

    def test_equality_row(self):
        sol = solve(_qp(np.eye(2) * 2, [0.0, 0.0], [[1.0, 1.0]], [1.0], [1.0]))
        np.testing.assert_allclose(sol.u_star, [0.5, 0.5], atol=1e-12)

    def test_contradictory_rows_infeasible(self):
        qp = _qp(np.eye(1), [0.0], [[1.0], [1.0]], [1.0, -math.inf], [math.inf, 0.0])
        assert solve(qp).status == INFEASIBLE

    def test_iteration_cap(self):
        rng = np.random.default_rng(0)
        H, g, A, lo, hi = random_feasible_qp(rng, n=6, m=40)
        sol = solve(_qp(H, g, A, lo, hi), max_iterations=1)
        assert sol.status in (MAX_ITERATIONS, OPTIMAL)
        if sol.status == OPTIMAL:
            assert sol.iterations <= 1


class TestAgainstOracles:
    def test_random_qps(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            qp = _qp(*random_feasible_qp(rng))
            sol = solve(qp)
            assert sol.status == OPTIMAL
            _, ref, dual = projected_gradient_qp(*_arrays(qp))
            assert abs(ref - dual) <= 1e-7 * max(1.0, abs(ref))  # oracle converged
            assert abs(sol.objective - ref) <= 1e-5 * max(1.0, abs(ref))
            res = kkt_check(*_arrays(qp), sol.u_star)
            assert max(res.values()) <= 1e-8, res
            assert sol.kkt_residual <= 1e-8

    def test_scale_invariance(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            H, g, A, lo, hi = random_feasible_qp(rng)
            a = solve(_qp(H, g, A, lo, hi))
            b = solve(_qp(1e3 * H, 1e3 * g, A, lo, hi))
            np.testing.assert_allclose(a.u_star, b.u_star, atol=1e-6)

    def test_deterministic(self):
        rng = np.random.default_rng(8)
        args = random_feasible_qp(rng, n=6, m=30)
        a, b = solve(_qp(*args)), solve(_qp(*args))
        assert a.u_star.tobytes() == b.u_star.tobytes()
        assert a.active_sides == b.active_sides

    def test_warm_start_same_answer(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            qp = _qp(*random_feasible_qp(rng, m=25))
            cold = solve(qp)
            warm = solve(qp, warm_start=cold.active_sides)
            np.testing.assert_allclose(warm.u_star, cold.u_star, atol=1e-9)
            assert warm.iterations <= cold.iterations
            if cold.active_sides:
                assert warm.warm_started

    def test_bad_warm_start_is_harmless(self):
        rng = np.random.default_rng(10)
        qp = _qp(*random_feasible_qp(rng, n=4, m=20))
        cold = solve(qp)
        junk = [(i, 1) for i in range(0, 20, 3)] + [(99, 1)]
        np.testing.assert_allclose(solve(qp, warm_start=junk).u_star, cold.u_star, atol=1e-9)

    def test_near_singular_warm_start_never_reports_violated_optimum(self):
        # frozen from a closed-loop replan: six nearly dependent rows in six
        # unknowns, hard problem infeasible by about 1e-5
        d = np.load(Path(__file__).parent / "data" / "degenerate_warm_qp.npz")
        qp = _qp(d["H"], d["g"], d["A"], d["lo"], d["hi"])
        warm = [tuple(int(v) for v in w) for w in d["warm"]]
        for sol in (solve(qp), solve(qp, warm_start=warm)):
            if sol.status == OPTIMAL:
                _, _, A, lo, hi = _arrays(qp)
                v = A @ sol.u_star
                assert np.all(v >= lo - 1e-8) and np.all(v <= hi + 1e-8)
            else:
                assert sol.status == INFEASIBLE

    @given(st.integers(0, 10_000))
    def test_feasibility_and_kkt_property(self, seed):
        rng = np.random.default_rng(seed)
        qp = _qp(*random_feasible_qp(rng))
        sol = solve(qp)
        assert sol.status == OPTIMAL
        for r in qp.rows:
            assert r.margin(sol.u_star) >= -1e-9
        assert max(kkt_check(*_arrays(qp), sol.u_star).values()) <= 1e-8


class TestSlack:
    def test_inactive_when_feasible(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            qp = _qp(*random_feasible_qp(rng, m=15))
            hard = solve(qp)
            soft = solve_with_slack(qp, list(range(0, 15, 2)))
            assert soft.max_slack <= 1e-8
            np.testing.assert_allclose(soft.u_star, hard.u_star, atol=1e-6)

    def test_one_dimensional_conflict(self):
        # hard u <= 0.3, soft u >= 0.5: slack absorbs exactly 0.2
        qp = _qp([[2.0]], [0.0], [[1.0], [1.0]], [-math.inf, 0.5], [0.3, math.inf])
        assert solve(qp).status == INFEASIBLE
        sol = solve_with_slack(qp, [1])
        assert sol.status == OPTIMAL
        assert sol.u_star[0] == pytest.approx(0.3, abs=1e-6)
        assert sol.max_slack == pytest.approx(0.2, abs=1e-6)

    def test_hard_conflict_stays_infeasible(self):
        qp = _qp([[2.0]], [0.0], [[1.0], [1.0], [1.0]], [-math.inf, 0.5, 0.0], [0.3, math.inf, math.inf])
        qp.rows[1] = LinearRow(np.array([1.0]), 0.5, math.inf, "hard_lo")
        assert solve_with_slack(qp, [2]).status == INFEASIBLE

    def test_penalty_must_be_positive(self):
        with pytest.raises(ValueError):
            solve_with_slack(_qp([[1.0]], [0.0], [[1.0]], [0.0], [1.0]), [0], penalty=0.0)
