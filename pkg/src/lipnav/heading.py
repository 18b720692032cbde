"""Turning-rate pre-computation that keeps the footstep QP linear."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import AtGoal, InvalidParameter
from .geometry import TOL
from .lip import wrap_angle

DEFAULT_OMEGA_MAX = 0.156 * math.pi


@dataclass(frozen=True)
class HeadingSchedule:
    rates: tuple[float, ...]
    headings: tuple[float, ...]  # heading after k+1 steps
    omega_max: float
    theta0: float = 0.0

    def __len__(self) -> int:
        return len(self.rates)

    def scaled(self, factor: float, T: float) -> "HeadingSchedule":
        """Same schedule with every rate multiplied by ``factor``."""
        rates = tuple(r * factor for r in self.rates)
        return HeadingSchedule(rates, _integrate(self.theta0, rates, T), self.omega_max, self.theta0)


def _integrate(theta0: float, rates: Sequence[float], T: float) -> tuple[float, ...]:
    out = []
    acc = 0.0
    for r in rates:
        acc += r
        out.append(wrap_angle(theta0 + T * acc))
    return tuple(out)


def target_heading(pos: Sequence[float], goal: Sequence[float]) -> float:
    dx = goal[0] - pos[0]
    dy = goal[1] - pos[1]
    if math.hypot(dx, dy) <= TOL:
        raise AtGoal("position coincides with the goal")
    return wrap_angle(math.atan2(dy, dx))


def precompute_turning_rates(
    theta0: float, target: float, N: int, T: float, omega_max: float = DEFAULT_OMEGA_MAX
) -> HeadingSchedule:
    """Uniform turning rate over the horizon toward ``target``, clamped to ``omega_max``."""
    if N < 1 or T <= 0 or omega_max <= 0:
        raise InvalidParameter(f"need N >= 1, T > 0, omega_max > 0 (got {N}, {T}, {omega_max})")
    delta = wrap_angle(target - theta0)
    rate = max(-omega_max, min(omega_max, delta / (N * T)))
    rates = (rate,) * N
    return HeadingSchedule(rates, _integrate(theta0, rates, T), omega_max, theta0)
