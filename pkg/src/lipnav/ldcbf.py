"""Half-space barriers around convex obstacles and their linear DCBF rows."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .condensing import AffineStateMap
from .constraints import LinearRow
from .errors import DegenerateNormal
from .geometry import ClosestPointResult, ConvexPolygon, Point2, closest_point, outward_normal, vertex_bisector


@dataclass(frozen=True)
class BarrierParams:
    gamma: float = 0.3
    active_radius: float = 4.0

    def __post_init__(self):
        if not 0 < self.gamma <= 1:
            raise ValueError(f"gamma must lie in (0, 1], got {self.gamma}")
        if not self.active_radius > 0:
            raise ValueError("active_radius must be positive")


@dataclass(frozen=True)
class HalfSpace:
    """Safe set {p : eta . (p - c) >= 0}."""

    eta: tuple[float, float]
    c: Point2
    source_obstacle: int = -1

    def __post_init__(self):
        if abs(math.hypot(*self.eta) - 1.0) > 1e-9:
            raise ValueError("half-space normal must be a unit vector")


def h_value(hs: HalfSpace, pos: Sequence[float]) -> float:
    return hs.eta[0] * (pos[0] - hs.c.x) + hs.eta[1] * (pos[1] - hs.c.y)


def build_halfspace(
    obstacle: ConvexPolygon, robot_pos: Sequence[float], source: int = -1, allow_inside: bool = False
) -> HalfSpace:
    """Supporting half-space at the obstacle point closest to the robot.

    With ``allow_inside`` an interior robot gets the half-space of the nearest
    edge, with h(robot) < 0; otherwise QueryInsideObstacle propagates.
    """
    res = closest_point(obstacle, robot_pos, allow_inside=allow_inside)
    return halfspace_from_closest(obstacle, res, robot_pos, source)


def halfspace_from_closest(
    obstacle: ConvexPolygon, res: ClosestPointResult, robot_pos: Sequence[float], source: int = -1
) -> HalfSpace:
    try:
        eta = outward_normal(obstacle, res, robot_pos)
    except DegenerateNormal:
        # robot exactly on a vertex: use the corner bisector
        eta = vertex_bisector(obstacle, res.index)
    return HalfSpace((float(eta[0]), float(eta[1])), res.point, source)


def obstacle_distance(obstacle: ConvexPolygon, pos: Sequence[float]) -> float:
    return closest_point(obstacle, pos, allow_inside=True).distance


def active_obstacles(world: Sequence[ConvexPolygon], robot_pos: Sequence[float], radius: float) -> list[int]:
    """Indices of obstacles whose boundary lies within ``radius`` of the robot."""
    return [i for i, poly in enumerate(world) if obstacle_distance(poly, robot_pos) <= radius]


def ldcbf_rows(hs: HalfSpace, params: BarrierParams, amap: AffineStateMap, N: int | None = None) -> list[LinearRow]:
    """One row per horizon step: h(p(k+1)) + (gamma - 1) h(p(k)) >= 0."""
    N = amap.N if N is None else N
    ex, ey = hs.eta
    ec = ex * hs.c.x + ey * hs.c.y
    g1 = params.gamma - 1.0
    rows = []
    for k in range(N):
        coef = ex * amap.px_coef[k + 1] + ey * amap.py_coef[k + 1]
        coef = coef + g1 * (ex * amap.px_coef[k] + ey * amap.py_coef[k])
        off = ex * amap.px_off[k + 1] + ey * amap.py_off[k + 1]
        off += g1 * (ex * amap.px_off[k] + ey * amap.py_off[k])
        lower = params.gamma * ec - off
        rows.append(LinearRow(np.asarray(coef), lower, math.inf, f"ldcbf[{hs.source_obstacle}][{k}]"))
    return rows
