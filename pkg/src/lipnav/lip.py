"""Heading-augmented 3D linear inverted pendulum: closed-form step dynamics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvalidParameter

GRAVITY = 9.81


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    r = math.remainder(a, 2 * math.pi)
    return math.pi if r <= -math.pi else r


@dataclass(frozen=True)
class LipState:
    p_x: float
    v_x: float
    p_y: float
    v_y: float
    theta: float

    def __post_init__(self):
        for name in ("p_x", "v_x", "p_y", "v_y", "theta"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"LipState.{name} is not finite")

    @property
    def position(self) -> tuple[float, float]:
        return (self.p_x, self.p_y)

    @property
    def velocity(self) -> tuple[float, float]:
        return (self.v_x, self.v_y)

    def as_array(self) -> np.ndarray:
        return np.array([self.p_x, self.v_x, self.p_y, self.v_y, self.theta])


@dataclass(frozen=True)
class LipControl:
    f_x: float
    f_y: float
    omega: float

    def __post_init__(self):
        for name in ("f_x", "f_y", "omega"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"LipControl.{name} is not finite")

    @property
    def foot(self) -> tuple[float, float]:
        return (self.f_x, self.f_y)


@dataclass(frozen=True)
class StepMatrices:
    A_d: np.ndarray
    B_d: np.ndarray
    beta: float
    duration: float

    @property
    def cosh(self) -> float:
        return float(self.A_d[0, 0])

    @property
    def sinh(self) -> float:
        return float(self.A_d[1, 0] / self.beta)


@lru_cache(maxsize=64)
def _step_matrices(H: float, duration: float, g: float) -> StepMatrices:
    beta = math.sqrt(g / H)
    ch = math.cosh(beta * duration)
    sh = math.sinh(beta * duration)
    A = np.array([[ch, sh / beta], [beta * sh, ch]])
    B = np.array([1.0 - ch, -beta * sh])
    A.flags.writeable = False
    B.flags.writeable = False
    return StepMatrices(A, B, beta, duration)


def step_matrices(H: float, duration: float, g: float = GRAVITY) -> StepMatrices:
    """Closed-form pendulum transition over ``duration`` seconds at CoM height ``H``."""
    if not H > 0:
        raise InvalidParameter(f"CoM height must be positive, got {H}")
    if not duration >= 0:
        raise InvalidParameter(f"duration must be non-negative, got {duration}")
    return _step_matrices(float(H), float(duration), float(g))


def _advance(x: LipState, fx: float, fy: float, omega: float, H: float, dt: float, g: float) -> LipState:
    m = step_matrices(H, dt, g)
    ch = m.A_d[0, 0]
    a01 = m.A_d[0, 1]
    a10 = m.A_d[1, 0]
    # written around the foot so the fixed point is exact
    dx = x.p_x - fx
    dy = x.p_y - fy
    return LipState(
        fx + ch * dx + a01 * x.v_x,
        a10 * dx + ch * x.v_x,
        fy + ch * dy + a01 * x.v_y,
        a10 * dy + ch * x.v_y,
        wrap_angle(x.theta + omega * dt),
    )


def step_to_step(x: LipState, u: LipControl, H: float, T: float, g: float = GRAVITY) -> LipState:
    """State at the start of the next step after stepping on ``u`` for ``T`` seconds."""
    return _advance(x, u.f_x, u.f_y, u.omega, H, T, g)


def propagate_within_step(
    x: LipState, foot: Sequence[float], omega: float, H: float, dt: float, g: float = GRAVITY
) -> LipState:
    if dt < 0:
        raise InvalidParameter(f"dt must be non-negative, got {dt}")
    return _advance(x, float(foot[0]), float(foot[1]), omega, H, dt, g)


def estimate_end_of_step_state(
    x_now: LipState,
    current_foot: Sequence[float],
    omega_now: float,
    t_remaining: float,
    H: float,
    g: float = GRAVITY,
) -> LipState:
    """Predict the state at the upcoming step boundary; this seeds each replan."""
    return propagate_within_step(x_now, current_foot, omega_now, H, t_remaining, g)


def propagate_samples(
    x: LipState, foot: Sequence[float], omega: float, H: float, times: np.ndarray, g: float = GRAVITY
) -> np.ndarray:
    """Closed-form states at each time in ``times`` (seconds from ``x``).

    Returns an (n, 5) array of [p_x, v_x, p_y, v_y, theta] rows.
    """
    beta = math.sqrt(g / H)
    ch = np.cosh(beta * times)
    sh = np.sinh(beta * times)
    dx = x.p_x - foot[0]
    dy = x.p_y - foot[1]
    out = np.empty((len(times), 5))
    out[:, 0] = foot[0] + ch * dx + sh / beta * x.v_x
    out[:, 1] = beta * sh * dx + ch * x.v_x
    out[:, 2] = foot[1] + ch * dy + sh / beta * x.v_y
    out[:, 3] = beta * sh * dy + ch * x.v_y
    th = np.remainder(x.theta + omega * times + np.pi, 2 * np.pi) - np.pi
    th[th <= -np.pi] = np.pi
    out[:, 4] = th
    return out
