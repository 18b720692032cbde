import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lipnav.errors import AtGoal, InvalidParameter
from lipnav.heading import DEFAULT_OMEGA_MAX, precompute_turning_rates, target_heading
from lipnav.lip import wrap_angle

angles = st.floats(-math.pi, math.pi)


def test_omega_max_value():
    assert DEFAULT_OMEGA_MAX == pytest.approx(0.49009, abs=1e-5)


@pytest.mark.parametrize(
    "pos,goal,expected",
    [((0, 0), (10, 10), math.pi / 4), ((0, 0), (-1, 0), math.pi), ((3, 4), (3, 9), math.pi / 2)],
)
def test_target_heading(pos, goal, expected):
    assert target_heading(pos, goal) == pytest.approx(expected)


def test_target_heading_at_goal():
    with pytest.raises(AtGoal):
        target_heading((1, 1), (1, 1))


def test_clamped_example():
    s = precompute_turning_rates(0.0, math.pi / 4, 3, 0.4)
    raw = (math.pi / 4) / (3 * 0.4)
    assert raw == pytest.approx(0.65450, abs=1e-5)
    assert s.rates == pytest.approx((0.49009,) * 3, abs=1e-5)
    assert s.headings[-1] == pytest.approx(0.58811, abs=1e-5)


def test_already_aligned():
    s = precompute_turning_rates(0.7, 0.7, 3, 0.4)
    assert s.rates == (0.0, 0.0, 0.0)
    assert s.headings == (0.7, 0.7, 0.7)


def test_wrap_takes_short_way():
    s = precompute_turning_rates(3.0, -3.0, 3, 0.4)
    delta = 2 * math.pi - 6
    assert delta == pytest.approx(0.28319, abs=1e-5)
    assert all(r > 0 for r in s.rates)
    assert s.rates[0] == pytest.approx(delta / 1.2)
    assert s.headings[-1] == pytest.approx(-3.0)


def test_rejects_bad_inputs():
    with pytest.raises(InvalidParameter):
        precompute_turning_rates(0, 1, 0, 0.4)
    with pytest.raises(InvalidParameter):
        precompute_turning_rates(0, 1, 3, 0.0)


def test_scaled_schedule():
    s = precompute_turning_rates(0.0, 1.0, 3, 0.4).scaled(0.5, 0.4)
    assert s.rates == pytest.approx((0.245045,) * 3, abs=1e-5)
    assert s.headings[0] == pytest.approx(0.4 * s.rates[0])


@given(angles, angles, st.integers(1, 6))
def test_clamp_and_sign(theta0, target, N):
    s = precompute_turning_rates(theta0, target, N, 0.4)
    delta = wrap_angle(target - theta0)
    assert abs(delta) <= math.pi
    for r in s.rates:
        assert abs(r) <= DEFAULT_OMEGA_MAX + 1e-15
        assert r == 0 or math.copysign(1, r) == math.copysign(1, delta)
    for h in s.headings:
        assert -math.pi < h <= math.pi


@given(angles, angles)
def test_receding_horizon_converges(theta0, target):
    theta = theta0
    err = abs(wrap_angle(target - theta))
    for _ in range(80):
        s = precompute_turning_rates(theta, target, 3, 0.4)
        theta = s.headings[0]
        new = abs(wrap_angle(target - theta))
        assert new <= err + 1e-12
        err = new
    assert err < 1e-9
