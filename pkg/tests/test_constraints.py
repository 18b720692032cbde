import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipnav.condensing import condense
from lipnav.constraints import (
    KinematicLimits,
    Stance,
    body_velocity,
    maneuverability_bound,
    maneuverability_rows,
    reachability_rows,
    velocity_rows,
)
from lipnav.heading import HeadingSchedule, precompute_turning_rates
from lipnav.lip import LipState, step_to_step

H, T = 1.0, 0.4
LIM = KinematicLimits()


def _fixed_heading(theta, N=3):
    return HeadingSchedule((0.0,) * N, (theta,) * N, 0.49, theta)


def _amap(x0, sched):
    return condense(x0, sched, H, T)


def _rollout(x0, amap, u):
    states = [x0]
    for c in amap.controls(u):
        states.append(step_to_step(states[-1], c, H, T))
    return states


class TestDefaults:
    def test_table_values(self):
        assert (LIM.v_x_min, LIM.v_x_max, LIM.v_y_min, LIM.v_y_max) == (-0.1, 0.8, 0.1, 0.4)
        assert LIM.l_max == pytest.approx(0.17321, abs=1e-5)
        assert LIM.alpha == 1.44

    def test_invalid_limits(self):
        with pytest.raises(ValueError):
            KinematicLimits(v_x_min=1.0)
        with pytest.raises(ValueError):
            KinematicLimits(v_y_min=0.0)


class TestStance:
    def test_sign_sequence_from_right(self):
        assert [Stance.RIGHT.after(k).sign for k in range(3)] == [1.0, -1.0, 1.0]

    def test_flip(self):
        assert Stance.LEFT.flipped() is Stance.RIGHT
        assert Stance.RIGHT.flipped().flipped() is Stance.RIGHT


class TestVelocityRows:
    def test_quarter_turn_selects_axes(self):
        x0 = LipState(0, 0.2, 0, 0.3, math.pi / 2)
        sched = _fixed_heading(math.pi / 2)
        amap = _amap(x0, sched)
        rows = velocity_rows(sched, Stance.RIGHT, LIM, amap)
        for k in range(3):
            s_v = Stance.RIGHT.after(k).sign
            lon, lat = rows[2 * k], rows[2 * k + 1]
            np.testing.assert_allclose(lon.coeffs, amap.vy_coef[k + 1], atol=1e-13)
            np.testing.assert_allclose(lat.coeffs, -s_v * amap.vx_coef[k + 1], atol=1e-13)

    def test_rows_equal_rotated_rollout(self):
        rng = np.random.default_rng(0)
        for _ in range(30):
            x0 = LipState(*rng.uniform(-1, 1, 4), rng.uniform(-3, 3))
            sched = precompute_turning_rates(x0.theta, rng.uniform(-3, 3), 3, T)
            amap = _amap(x0, sched)
            stance = Stance.LEFT if rng.random() < 0.5 else Stance.RIGHT
            rows = velocity_rows(sched, stance, LIM, amap)
            u = np.array([x0.p_x, x0.p_y] * 3) + rng.uniform(-0.3, 0.3, 6)
            states = _rollout(x0, amap, u)
            for k in range(3):
                lon, lat = body_velocity(amap.thetas[k], states[k + 1].v_x, states[k + 1].v_y, stance.after(k).sign)
                # row value = quantity - offset, and the bounds carry the same offset
                assert rows[2 * k].value(u) - rows[2 * k].lower == pytest.approx(lon - LIM.v_x_min, abs=1e-12)
                assert rows[2 * k + 1].value(u) - rows[2 * k + 1].lower == pytest.approx(lat - LIM.v_y_min, abs=1e-12)

    def test_flipping_stance_negates_lateral_rows(self):
        x0 = LipState(0.1, 0.3, -0.2, 0.1, 0.4)
        sched = precompute_turning_rates(0.4, 1.0, 3, T)
        amap = _amap(x0, sched)
        a = velocity_rows(sched, Stance.LEFT, LIM, amap)
        b = velocity_rows(sched, Stance.RIGHT, LIM, amap)
        for k in range(3):
            np.testing.assert_array_equal(a[2 * k].coeffs, b[2 * k].coeffs)
            np.testing.assert_array_equal(a[2 * k + 1].coeffs, -b[2 * k + 1].coeffs)

    @given(st.lists(st.floats(-1, 1), min_size=6, max_size=6), st.floats(-3, 3))
    def test_affine_superposition(self, du, theta):
        x0 = LipState(0.2, 0.1, -0.3, 0.2, theta)
        sched = precompute_turning_rates(theta, theta + 0.5, 3, T)
        amap = _amap(x0, sched)
        rows = velocity_rows(sched, Stance.RIGHT, LIM, amap) + reachability_rows(sched, LIM, amap)
        rows += maneuverability_rows(sched, LIM, amap)
        u = np.array(du)
        for r in rows:
            assert r.value(2 * u) - r.value(u) == pytest.approx(r.value(u) - r.value(0 * u), abs=1e-12)


class TestReachability:
    def test_identity_rotation(self):
        x0 = LipState(1.0, 0.2, 2.0, -0.1, 0.0)
        sched = _fixed_heading(0.0, N=1)
        amap = _amap(x0, sched)
        lon, lat = reachability_rows(sched, LIM, amap)
        np.testing.assert_array_equal(lon.coeffs, [1.0, 0.0])
        np.testing.assert_array_equal(lat.coeffs, [0.0, 1.0])
        assert (lon.lower, lon.upper) == pytest.approx((1.0 - LIM.l_max, 1.0 + LIM.l_max))
        assert (lat.lower, lat.upper) == pytest.approx((2.0 - LIM.l_max, 2.0 + LIM.l_max))

    def test_rotated_displacement(self):
        x0 = LipState(0.0, 0.0, 0.0, 0.0, math.pi / 4)
        sched = _fixed_heading(math.pi / 4, N=1)
        lon, lat = reachability_rows(sched, LIM, _amap(x0, sched))
        u = np.array([0.1, 0.1])
        assert lon.value(u) == pytest.approx(0.14142, abs=1e-5)
        assert lat.value(u) == pytest.approx(0.0, abs=1e-15)
        assert lon.margin(u) > 0 and lat.margin(u) > 0

    def test_rollout_consistency(self):
        rng = np.random.default_rng(2)
        x0 = LipState(*rng.uniform(-1, 1, 4), 0.7)
        sched = precompute_turning_rates(0.7, -1.0, 3, T)
        amap = _amap(x0, sched)
        rows = reachability_rows(sched, LIM, amap)
        u = np.array([x0.p_x, x0.p_y] * 3) + rng.uniform(-0.3, 0.3, 6)
        states = _rollout(x0, amap, u)
        for k in range(3):
            th = amap.thetas[k]
            d = u[2 * k : 2 * k + 2] - np.array(states[k].position)
            lon = math.cos(th) * d[0] + math.sin(th) * d[1]
            lat = -math.sin(th) * d[0] + math.cos(th) * d[1]
            assert rows[2 * k].value(u) - rows[2 * k].lower == pytest.approx(lon + LIM.l_max, abs=1e-12)
            assert rows[2 * k + 1].value(u) - rows[2 * k + 1].lower == pytest.approx(lat + LIM.l_max, abs=1e-12)


class TestManeuverability:
    def test_no_turn(self):
        assert maneuverability_bound(LIM, 0.0) == 0.8

    def test_clamped_turn_values(self):
        w = 0.156 * math.pi
        assert maneuverability_bound(LIM, w) == pytest.approx(0.8 - 1.44 * 0.156, abs=1e-12)
        assert maneuverability_bound(KinematicLimits(alpha=3.6), w) == pytest.approx(0.8 - 3.6 * 0.156, abs=1e-12)
        # quoted rounded figures
        assert maneuverability_bound(LIM, 0.49009) == pytest.approx(0.57534, abs=5e-5)
        assert maneuverability_bound(KinematicLimits(alpha=3.6), 0.49009) == pytest.approx(0.23835, abs=5e-5)

    def test_sharp_preset(self):
        lim = KinematicLimits.sharp_turn_penalty(v_x_max=0.7)
        assert lim.alpha == 3.6 and lim.v_x_max == 0.7
        assert KinematicLimits().alpha == 1.44

    def test_rows_use_rate_of_preceding_step(self):
        x0 = LipState(0, 0.3, 0, 0.1, 0.0)
        sched = precompute_turning_rates(0.0, 2.0, 3, T)
        rows = maneuverability_rows(sched, LIM, _amap(x0, sched))
        assert len(rows) == 3
        assert all(r.lower == -math.inf for r in rows)
