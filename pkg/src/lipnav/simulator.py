"""Closed-loop LIP-level episodes and seeded random worlds."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constraints import Stance
from .errors import GenerationFailed, NoPathFound, SafetyFault, SolverFault
from .geometry import ConvexPolygon, Point2, as_point, convex_hull, points_in_polygon, polygon_distance, closest_point, signed_distances
from .lip import LipState, estimate_end_of_step_state, propagate_samples, propagate_within_step, wrap_angle
from .mpc import MpcParams, MpcResult, Planner
from .rrt import RrtParams, SubgoalTracker, Waypath, plan_path

GOAL_REACHED = "GoalReached"
SAFETY_VIOLATION = "SafetyViolation"
SOLVER_FAULT = "SolverFault"
TIMEOUT = "Timeout"

GLOBAL = "global"
SUBGOAL = "subgoal"

DEFAULT_BOUNDS = (-1.0, -1.0, 11.0, 11.0)


@dataclass
class World:
    obstacles: list[ConvexPolygon]
    inflated: list[ConvexPolygon]
    bounds: tuple[float, float, float, float] = DEFAULT_BOUNDS
    start: Point2 = Point2(0.0, 0.0)
    goal: Point2 = Point2(10.0, 10.0)
    seed: int | None = None
    inflation: float = 0.35

    @classmethod
    def from_obstacles(
        cls,
        obstacles: Sequence[ConvexPolygon],
        inflation: float = 0.35,
        bounds=DEFAULT_BOUNDS,
        start=(0.0, 0.0),
        goal=(10.0, 10.0),
        seed: int | None = None,
    ) -> "World":
        obstacles = list(obstacles)
        return cls(
            obstacles,
            [p.offset(inflation) for p in obstacles],
            tuple(float(b) for b in bounds),
            as_point(start),
            as_point(goal),
            seed,
            inflation,
        )


OMEGA_AT_REPLAN, OMEGA_AT_STEP = "replan", "step"


@dataclass(frozen=True)
class RunParams:
    dt: float = 0.001
    replan_period: float = 0.05
    goal_tolerance: float = 0.3
    max_steps: int = 200
    initial_stance: Stance = Stance.LEFT
    initial_heading: float | None = None  # None faces the goal
    disturbance: float = 0.0  # max |dv| per micro-tick, m/s
    disturbance_seed: int = 0
    # "step": heading rate changes only at step boundaries, with the committed foot;
    # "replan": the newest rate takes effect at once (can strand the velocity rows)
    omega_update: str = "step"

    def __post_init__(self):
        if self.omega_update not in (OMEGA_AT_REPLAN, OMEGA_AT_STEP):
            raise ValueError(f"omega_update must be {OMEGA_AT_REPLAN!r} or {OMEGA_AT_STEP!r}")


def generate_environment(
    seed: int,
    n_obstacles: int = 8,
    bounds: tuple[float, float, float, float] = DEFAULT_BOUNDS,
    size_range: tuple[float, float] = (0.4, 1.0),
    clearance: float = 0.5,
    inflation: float = 0.35,
    start: Sequence[float] = (0.0, 0.0),
    goal: Sequence[float] = (10.0, 10.0),
    max_rejections: int = 10_000,
) -> World:
    """Random convex obstacles, rejection-sampled for clearance; deterministic per seed."""
    if n_obstacles < 0:
        raise ValueError("n_obstacles must be non-negative")
    rng = np.random.default_rng(seed)
    start, goal = as_point(start), as_point(goal)
    xmin, ymin, xmax, ymax = bounds
    raw: list[ConvexPolygon] = []
    infl: list[ConvexPolygon] = []
    rejections = 0
    while len(raw) < n_obstacles:
        radius = rng.uniform(*size_range)
        cx = rng.uniform(xmin + radius, xmax - radius)
        cy = rng.uniform(ymin + radius, ymax - radius)
        k = int(rng.integers(3, 9))
        ang = np.sort(rng.uniform(0.0, 2 * math.pi, k))
        rad = radius * np.sqrt(rng.uniform(0.3, 1.0, k))
        pts = np.column_stack([cx + rad * np.cos(ang), cy + rad * np.sin(ang)])
        ok = True
        try:
            poly = convex_hull(pts)
        except Exception:
            ok = False
        if ok:
            grown = poly.offset(inflation)
            for p in (start, goal):
                if closest_point(grown, p, allow_inside=True).distance < clearance:
                    ok = False
            if ok:
                ok = all(polygon_distance(grown, other) >= clearance for other in infl)
        if ok:
            raw.append(poly)
            infl.append(grown)
        else:
            rejections += 1
            if rejections >= max_rejections:
                raise GenerationFailed(f"gave up after {rejections} rejections ({len(raw)} placed)")
    return World(raw, infl, tuple(float(b) for b in bounds), start, goal, seed, inflation)


@dataclass
class StepRecord:
    index: int
    time: float
    stance: str
    foot: tuple[float, float]
    omega: float
    state: tuple[float, float, float, float, float]  # state at the boundary the foot was committed

    def as_dict(self) -> dict:
        return {
            "step": self.index,
            "t": self.time,
            "stance": self.stance,
            "foot": list(self.foot),
            "omega": self.omega,
            "state": list(self.state),
        }


@dataclass
class ReplanRecord:
    time: float
    step: int
    target: tuple[float, float]
    x0: tuple[float, float, float, float, float]
    objective: float
    status: str
    max_slack: float
    solve_time: float
    qp_iterations: int
    heading_scale: float
    command: tuple[float, float, float]
    halfspaces: list[tuple[int, float, float, float, float]]  # (obstacle, eta_x, eta_y, c_x, c_y)
    h0: list[float]
    predicted: list[tuple[float, float]]
    margins: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "t": self.time,
            "step": self.step,
            "target": list(self.target),
            "x0": list(self.x0),
            "objective": self.objective,
            "status": self.status,
            "max_slack": self.max_slack,
            "solve_time": self.solve_time,
            "qp_iterations": self.qp_iterations,
            "heading_scale": self.heading_scale,
            "command": list(self.command),
            "halfspaces": [list(h) for h in self.halfspaces],
            "h0": self.h0,
            "predicted": [list(p) for p in self.predicted],
        }


@dataclass
class EpisodeLog:
    mode: str
    world: World
    ticks: np.ndarray  # (n, 6): t, p_x, v_x, p_y, v_y, theta
    steps: list[StepRecord]
    replans: list[ReplanRecord]
    outcome: str
    step_count: int
    sim_time: float
    wall_time: float
    path: Waypath | None = None
    violation: tuple[float, float] | None = None
    message: str = ""
    subgoals: list[tuple[float, float]] = field(default_factory=list)

    def solve_times(self) -> np.ndarray:
        return np.array([r.solve_time for r in self.replans])

    def min_clearance(self) -> float:
        """Smallest signed distance from any tick to a raw obstacle."""
        if not self.world.obstacles or len(self.ticks) == 0:
            return math.inf
        pts = self.ticks[:, [1, 3]]
        return float(min(signed_distances(poly, pts).min() for poly in self.world.obstacles))

    def summary(self) -> dict:
        st = self.solve_times()
        return {
            "outcome": self.outcome,
            "steps": self.step_count,
            "sim_time_s": self.sim_time,
            "mean_solve_ms": float(st.mean() * 1e3) if len(st) else 0.0,
            "p99_solve_ms": float(np.percentile(st, 99) * 1e3) if len(st) else 0.0,
            "mode": self.mode,
            "seed": self.world.seed,
        }


def _first_violation(world: World, seg: np.ndarray) -> int | None:
    pts = seg[:, [0, 2]]  # seg rows are [p_x, v_x, p_y, v_y, theta]
    first = None
    for poly in world.obstacles:
        hit = points_in_polygon(poly, pts)
        if hit.any():
            i = int(np.argmax(hit))
            first = i if first is None else min(first, i)
    return first


def run_episode(
    world: World,
    mode: str = GLOBAL,
    mpc_params: MpcParams | None = None,
    rrt_params: RrtParams | None = None,
    run_params: RunParams | None = None,
) -> EpisodeLog:
    """Run one closed-loop episode; the outcome is reported in the log, never raised."""
    mpc_params = mpc_params or MpcParams()
    rrt_params = rrt_params or RrtParams()
    run = run_params or RunParams()
    wall0 = time.perf_counter()

    ticks_per_step = round(mpc_params.T / run.dt)
    ticks_per_replan = round(run.replan_period / run.dt)
    if abs(ticks_per_step * run.dt - mpc_params.T) > 1e-12 or ticks_per_step % ticks_per_replan:
        raise ValueError("step duration must be a whole number of replan periods and micro-ticks")

    goal = world.goal
    theta0 = run.initial_heading
    if theta0 is None:
        theta0 = math.atan2(goal.y - world.start.y, goal.x - world.start.x)
    x = LipState(world.start.x, 0.0, world.start.y, 0.0, wrap_angle(theta0))
    foot = (world.start.x, world.start.y)
    omega = 0.0
    stance = run.initial_stance
    planner = Planner(mpc_params)

    path = None
    tracker = None
    steps: list[StepRecord] = []
    replans: list[ReplanRecord] = []
    tick_rows: list[np.ndarray] = [np.array([[0.0, x.p_x, x.v_x, x.p_y, x.v_y, x.theta]])]
    subgoals: list[tuple[float, float]] = []
    outcome = None
    message = ""
    violation = None
    rng = np.random.default_rng(run.disturbance_seed) if run.disturbance > 0 else None

    if mode == SUBGOAL:
        try:
            if abs(rrt_params.inflation - world.inflation) <= 1e-12:
                blocked = world.inflated
            else:
                blocked = [p.offset(rrt_params.inflation) for p in world.obstacles]
            path = plan_path(blocked, world.start, goal, rrt_params, world.bounds)
        except NoPathFound as exc:
            outcome, message = SOLVER_FAULT, f"global planner: {exc}"
        else:
            tracker = SubgoalTracker(path, rrt_params.lookahead)
    elif mode != GLOBAL:
        raise ValueError(f"unknown mode {mode!r}")

    step_count = 0
    latest: MpcResult | None = None
    tick = 0
    dt = run.dt
    replan_offsets = range(0, ticks_per_step, ticks_per_replan)

    while outcome is None:
        # one walking step: replans at fixed offsets, micro-ticks in between
        for offset in replan_offsets:
            t_remaining = (ticks_per_step - offset) * dt
            x_end = estimate_end_of_step_state(x, foot, omega, t_remaining, mpc_params.H, mpc_params.g)
            if tracker is not None:
                target = tracker.update((x.p_x, x.p_y))
                if not subgoals or subgoals[-1] != (target.x, target.y):
                    subgoals.append((target.x, target.y))
            else:
                target = goal
            try:
                latest = planner.plan(x_end, stance.flipped(), target, world.inflated, keep_out=world.obstacles)
            except SolverFault as exc:
                outcome, message = SOLVER_FAULT, str(exc)
                break
            except SafetyFault as exc:
                outcome, message = SAFETY_VIOLATION, str(exc)
                break
            d = latest.diagnostics
            replans.append(
                ReplanRecord(
                    time=(tick) * dt,
                    step=step_count,
                    target=(float(target[0]), float(target[1])),
                    x0=tuple(x_end.as_array().tolist()),
                    objective=d.objective,
                    status=d.status,
                    max_slack=d.max_slack,
                    solve_time=d.solve_time,
                    qp_iterations=d.qp_iterations,
                    heading_scale=d.heading_scale,
                    command=(latest.command.f_x, latest.command.f_y, latest.command.omega),
                    halfspaces=[(h.source_obstacle, h.eta[0], h.eta[1], h.c.x, h.c.y) for h in d.halfspaces],
                    h0=list(d.h0),
                    predicted=[(s.p_x, s.p_y) for s in latest.predicted_states],
                    margins=d.margins,
                )
            )
            if run.omega_update == OMEGA_AT_REPLAN:
                omega = latest.command.omega
            # micro-ticks until the next replan
            n = ticks_per_replan
            if rng is None:
                times = dt * np.arange(1, n + 1)
                seg = propagate_samples(x, foot, omega, mpc_params.H, times, mpc_params.g)
                x_next = propagate_within_step(x, foot, omega, mpc_params.H, n * dt, mpc_params.g)
            else:
                seg = np.empty((n, 5))
                xi = x
                for j in range(n):
                    xi = propagate_within_step(xi, foot, omega, mpc_params.H, dt, mpc_params.g)
                    kick = rng.uniform(-run.disturbance, run.disturbance, 2)
                    xi = LipState(xi.p_x, xi.v_x + kick[0], xi.p_y, xi.v_y + kick[1], xi.theta)
                    seg[j] = xi.as_array()
                x_next = xi
            tseg = (tick + np.arange(1, n + 1)) * dt
            hit = _first_violation(world, seg)
            if hit is not None:
                # the episode ends at the first offending tick
                tick_rows.append(np.column_stack([tseg, seg])[: hit + 1])
                tick += hit + 1
                violation = (float(seg[hit, 0]), float(seg[hit, 2]))
                outcome, message = SAFETY_VIOLATION, "CoM entered an obstacle"
                break
            tick_rows.append(np.column_stack([tseg, seg]))
            tick += n
            x = x_next
        if outcome is not None:
            break

        # step boundary
        step_count += 1
        if math.hypot(x.p_x - goal.x, x.p_y - goal.y) <= run.goal_tolerance:
            outcome = GOAL_REACHED
            break
        if step_count >= run.max_steps:
            outcome = TIMEOUT
            break
        cmd = latest.command
        stance = stance.flipped()
        foot = (cmd.f_x, cmd.f_y)
        omega = cmd.omega
        steps.append(
            StepRecord(
                index=step_count,
                time=step_count * mpc_params.T,
                stance=stance.value,
                foot=foot,
                omega=omega,
                state=tuple(x.as_array().tolist()),
            )
        )

    sim_time = step_count * mpc_params.T if outcome in (GOAL_REACHED, TIMEOUT) else tick * dt
    ticks = np.vstack(tick_rows)
    return EpisodeLog(
        mode=mode,
        world=world,
        ticks=ticks,
        steps=steps,
        replans=replans,
        outcome=outcome,
        step_count=step_count,
        sim_time=sim_time,
        wall_time=time.perf_counter() - wall0,
        path=path,
        violation=violation,
        message=message,
        subgoals=subgoals,
    )
