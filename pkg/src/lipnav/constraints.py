"""Linear kinematic rows: walking velocity, leg reachability, maneuverability."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .condensing import AffineStateMap
from .heading import HeadingSchedule


class Stance(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"

    def flipped(self) -> "Stance":
        return Stance.RIGHT if self is Stance.LEFT else Stance.LEFT

    @property
    def sign(self) -> float:
        """Lateral velocity sign: +1 while standing on the right foot."""
        return 1.0 if self is Stance.RIGHT else -1.0

    def after(self, k: int) -> "Stance":
        return self if k % 2 == 0 else self.flipped()


@dataclass(frozen=True)
class LinearRow:
    coeffs: np.ndarray
    lower: float
    upper: float
    label: str

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"row {self.label}: lower {self.lower} > upper {self.upper}")

    def value(self, u: np.ndarray) -> float:
        return float(self.coeffs @ u)

    def margin(self, u: np.ndarray) -> float:
        """Distance to the nearest bound; negative when violated."""
        v = self.value(u)
        return min(v - self.lower, self.upper - v)


ALPHA_SHARP = 3.6


@dataclass(frozen=True)
class KinematicLimits:
    v_x_min: float = -0.1
    v_x_max: float = 0.8
    v_y_min: float = 0.1
    v_y_max: float = 0.4
    l_max: float = 0.1 * math.sqrt(3.0)
    alpha: float = 1.44

    def __post_init__(self):
        if not self.v_x_min < self.v_x_max:
            raise ValueError("v_x_min must be below v_x_max")
        if not 0 < self.v_y_min < self.v_y_max:
            raise ValueError("need 0 < v_y_min < v_y_max")
        if not self.l_max > 0:
            raise ValueError("l_max must be positive")
        if not self.alpha >= 0:
            raise ValueError("alpha must be non-negative")

    @classmethod
    def sharp_turn_penalty(cls, **overrides) -> "KinematicLimits":
        """Alternative preset with the steeper speed/turn trade-off alpha = 3.6."""
        return cls(**dict({"alpha": ALPHA_SHARP}, **overrides))


def body_velocity(theta: float, vx: float, vy: float, s_v: float) -> tuple[float, float]:
    """World velocity -> (longitudinal, sign-adjusted lateral) body components."""
    c, s = math.cos(theta), math.sin(theta)
    return c * vx + s * vy, s_v * (-s * vx + c * vy)


def velocity_rows(
    schedule: HeadingSchedule, stance0: Stance, limits: KinematicLimits, amap: AffineStateMap
) -> list[LinearRow]:
    rows = []
    for k in range(amap.N):
        th = amap.thetas[k]
        c, s = math.cos(th), math.sin(th)
        s_v = stance0.after(k).sign
        cx, ox = amap.vx_coef[k + 1], amap.vx_off[k + 1]
        cy, oy = amap.vy_coef[k + 1], amap.vy_off[k + 1]
        lon = c * cx + s * cy
        lon_off = c * ox + s * oy
        lat = s_v * (-s * cx + c * cy)
        lat_off = s_v * (-s * ox + c * oy)
        rows.append(LinearRow(lon, limits.v_x_min - lon_off, limits.v_x_max - lon_off, f"vel_lon[{k}]"))
        rows.append(LinearRow(lat, limits.v_y_min - lat_off, limits.v_y_max - lat_off, f"vel_lat[{k}]"))
    return rows


def reachability_rows(
    schedule: HeadingSchedule, limits: KinematicLimits, amap: AffineStateMap
) -> list[LinearRow]:
    """Bound the heading-rotated CoM-to-foot displacement per axis."""
    rows = []
    for k in range(amap.N):
        th = amap.thetas[k]
        c, s = math.cos(th), math.sin(th)
        dx = -amap.px_coef[k].copy()
        dx[2 * k] += 1.0
        dy = -amap.py_coef[k].copy()
        dy[2 * k + 1] += 1.0
        ox, oy = -amap.px_off[k], -amap.py_off[k]
        lon, lon_off = c * dx + s * dy, c * ox + s * oy
        lat, lat_off = -s * dx + c * dy, -s * ox + c * oy
        rows.append(LinearRow(lon, -limits.l_max - lon_off, limits.l_max - lon_off, f"reach_lon[{k}]"))
        rows.append(LinearRow(lat, -limits.l_max - lat_off, limits.l_max - lat_off, f"reach_lat[{k}]"))
    return rows


def maneuverability_bound(limits: KinematicLimits, omega: float) -> float:
    return limits.v_x_max - limits.alpha / math.pi * abs(omega)


def maneuverability_rows(
    schedule: HeadingSchedule, limits: KinematicLimits, amap: AffineStateMap
) -> list[LinearRow]:
    rows = []
    for k in range(1, amap.N + 1):
        th = amap.thetas[k]
        c, s = math.cos(th), math.sin(th)
        coef = c * amap.vx_coef[k] + s * amap.vy_coef[k]
        off = c * amap.vx_off[k] + s * amap.vy_off[k]
        bound = maneuverability_bound(limits, schedule.rates[k - 1])
        rows.append(LinearRow(coef, -math.inf, bound - off, f"maneuver[{k}]"))
    return rows
