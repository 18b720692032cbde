"""Plain 2D RRT used to place sub-goals for the footstep planner."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NoPathFound
from .geometry import ConvexPolygon, Point2, as_point, point_in_polygon, segment_hits_polygon


@dataclass(frozen=True)
class RrtParams:
    step_size: float = 0.5
    goal_bias: float = 0.1
    max_nodes: int = 5000
    goal_tolerance: float = 0.3
    seed: int = 0
    inflation: float = 0.35
    lookahead: float = 1.5

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if not 0 <= self.goal_bias <= 1:
            raise ValueError("goal_bias must lie in [0, 1]")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be at least 1")


@dataclass(frozen=True)
class Waypath:
    waypoints: tuple[Point2, ...]

    def __len__(self) -> int:
        return len(self.waypoints)

    def length(self) -> float:
        w = self.waypoints
        return sum(w[i].dist(w[i + 1]) for i in range(len(w) - 1))


def segment_free(obstacles: Sequence[ConvexPolygon], a: Sequence[float], b: Sequence[float]) -> bool:
    return not any(segment_hits_polygon(poly, a, b) for poly in obstacles)


def _shortcut(path: list[Point2], obstacles: Sequence[ConvexPolygon]) -> list[Point2]:
    """Greedy smoothing: from each kept waypoint jump to the farthest visible one."""
    out = [path[0]]
    i = 0
    while i < len(path) - 1:
        j = len(path) - 1
        while j > i + 1 and not segment_free(obstacles, path[i], path[j]):
            j -= 1
        out.append(path[j])
        i = j
    return out


def plan_path(
    obstacles: Sequence[ConvexPolygon],
    start: Sequence[float],
    goal: Sequence[float],
    params: RrtParams | None = None,
    bounds: tuple[float, float, float, float] = (-1.0, -1.0, 11.0, 11.0),
) -> Waypath:
    """RRT from ``start`` to ``goal`` among (already inflated) ``obstacles``."""
    params = params or RrtParams()
    start, goal = as_point(start), as_point(goal)
    for i, poly in enumerate(obstacles):
        if point_in_polygon(poly, start):
            raise NoPathFound(f"start lies inside obstacle {i}")
        if point_in_polygon(poly, goal):
            raise NoPathFound(f"goal lies inside obstacle {i}")
    if segment_free(obstacles, start, goal):
        return Waypath((start, goal))

    rng = np.random.default_rng(params.seed)
    xmin, ymin, xmax, ymax = bounds
    nodes = np.empty((params.max_nodes + 1, 2))
    nodes[0] = start
    parent = [-1]
    count = 1
    reached = -1
    for _ in range(params.max_nodes):
        if rng.random() < params.goal_bias:
            sample = np.array(goal)
        else:
            sample = np.array([rng.uniform(xmin, xmax), rng.uniform(ymin, ymax)])
        d = np.hypot(nodes[:count, 0] - sample[0], nodes[:count, 1] - sample[1])
        near = int(np.argmin(d))
        if d[near] < 1e-12:
            continue
        step = min(params.step_size, float(d[near]))
        new = nodes[near] + (sample - nodes[near]) * (step / d[near])
        if not (xmin <= new[0] <= xmax and ymin <= new[1] <= ymax):
            continue
        if not segment_free(obstacles, nodes[near], new):
            continue
        nodes[count] = new
        parent.append(near)
        count += 1
        if math.hypot(new[0] - goal.x, new[1] - goal.y) <= params.goal_tolerance and segment_free(
            obstacles, new, goal
        ):
            reached = count - 1
            break
    if reached < 0:
        raise NoPathFound(f"no path after {params.max_nodes} expansions")
    chain = [goal]
    k = reached
    while k >= 0:
        chain.append(Point2(*nodes[k]))
        k = parent[k]
    chain.reverse()
    return Waypath(tuple(_shortcut(chain, obstacles)))


def next_subgoal(path: Waypath, robot_pos: Sequence[float], lookahead: float, start_index: int = 0) -> tuple[Point2, int]:
    """First waypoint at or after ``start_index`` farther than ``lookahead`` from the robot.

    Returns the waypoint and its index; the final goal once everything else is
    within reach or the goal itself is. Feeding the returned index back in
    keeps selection monotone.
    """
    w = path.waypoints
    last = len(w) - 1
    if w[last].dist(robot_pos) <= lookahead:
        return w[last], last
    for i in range(max(start_index, 0), last):
        if w[i].dist(robot_pos) > lookahead:
            return w[i], i
    return w[last], last


class SubgoalTracker:
    def __init__(self, path: Waypath, lookahead: float):
        self.path = path
        self.lookahead = lookahead
        self.index = 0

    def update(self, robot_pos: Sequence[float]) -> Point2:
        pt, self.index = next_subgoal(self.path, robot_pos, self.lookahead, self.index)
        return pt
