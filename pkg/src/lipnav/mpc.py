"""Receding-horizon footstep QP over the step-to-step pendulum dynamics."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import qp as qpmod
from .condensing import AffineStateMap, condense
from .constraints import (
    KinematicLimits,
    LinearRow,
    Stance,
    maneuverability_rows,
    reachability_rows,
    velocity_rows,
)
from .errors import AtGoal, SafetyFault, SolverFault
from .geometry import ConvexPolygon, closest_point, TOL
from .heading import DEFAULT_OMEGA_MAX, HeadingSchedule, precompute_turning_rates, target_heading
from .ldcbf import BarrierParams, HalfSpace, h_value, halfspace_from_closest, ldcbf_rows
from .lip import GRAVITY, LipControl, LipState

# turning-rate scale factors tried when the hard rows are infeasible
HEADING_BACKOFF = (1.0, 0.5, 0.25, 0.0)


@dataclass(frozen=True)
class MpcParams:
    N: int = 3
    T: float = 0.4
    H: float = 1.0
    g: float = GRAVITY
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    barrier: BarrierParams = field(default_factory=BarrierParams)
    omega_max: float = DEFAULT_OMEGA_MAX
    slack_penalty: float = 1e4
    control_weight: float = 0.0
    max_iterations: int = 200

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("horizon N must be at least 1")
        if not (self.T > 0 and self.H > 0):
            raise ValueError("T and H must be positive")


@dataclass
class MpcDiagnostics:
    objective: float
    status: str
    margins: dict[str, float]
    max_slack: float
    solve_time: float
    qp_iterations: int
    warm_started: bool
    heading_scale: float
    halfspaces: list[HalfSpace]
    h0: list[float]


@dataclass
class MpcResult:
    controls: list[LipControl]
    predicted_states: list[LipState]  # x_1 .. x_N
    x0: LipState
    stance0: Stance
    schedule: HeadingSchedule
    diagnostics: MpcDiagnostics
    active_labels: list[tuple[str, int]] = field(default_factory=list)

    @property
    def command(self) -> LipControl:
        return self.controls[0]


def build_cost(amap: AffineStateMap, goal: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    """Hessian and gradient of sum_k ||p(k) - goal||^2, k = 1..N (constant dropped)."""
    n = amap.n
    Hm = np.zeros((n, n))
    gv = np.zeros(n)
    gvec = np.array([goal[0], goal[1]], dtype=float)
    for k in range(1, amap.N + 1):
        M, m = amap.position(k)
        Hm += M.T @ M
        gv += M.T @ (m - gvec)
    return 2.0 * Hm, 2.0 * gv


def cost_constant(amap: AffineStateMap, goal: Sequence[float]) -> float:
    return float(sum((amap.px_off[k] - goal[0]) ** 2 + (amap.py_off[k] - goal[1]) ** 2 for k in range(1, amap.N + 1)))


def _check_keep_out(p0, keep_out: Sequence[ConvexPolygon]) -> None:
    for i, poly in enumerate(keep_out):
        if closest_point(poly, p0, allow_inside=True).distance < -TOL:
            raise SafetyFault(f"planning state ({p0[0]:.6f}, {p0[1]:.6f}) is inside obstacle {i}")


class Planner:
    """Stateful wrapper that carries the QP active set between replans of one step."""

    def __init__(self, params: MpcParams | None = None):
        self.params = params or MpcParams()
        self._warm: list[tuple[str, int]] = []
        self._warm_stance: Stance | None = None

    def reset(self) -> None:
        self._warm = []
        self._warm_stance = None

    def plan(
        self,
        x0: LipState,
        stance0: Stance,
        goal: Sequence[float],
        obstacles: Sequence[ConvexPolygon] = (),
        keep_out: Sequence[ConvexPolygon] | None = None,
    ) -> MpcResult:
        warm = self._warm if self._warm_stance == stance0 else []
        res = plan(x0, stance0, goal, obstacles, self.params, keep_out=keep_out, warm_labels=warm)
        self._warm = res.active_labels
        self._warm_stance = stance0
        return res


def plan(
    x0: LipState,
    stance0: Stance,
    goal: Sequence[float],
    obstacles: Sequence[ConvexPolygon],
    params: MpcParams | None = None,
    keep_out: Sequence[ConvexPolygon] | None = None,
    warm_labels: Sequence[tuple[str, int]] = (),
) -> MpcResult:
    """Solve one replan.

    ``obstacles`` are the (inflated) shapes that produce barrier rows;
    ``keep_out`` are the shapes whose interior is a hard fault, defaulting to
    ``obstacles``.
    """
    params = params or MpcParams()
    t_start = time.perf_counter()
    p0 = (x0.p_x, x0.p_y)
    _check_keep_out(p0, obstacles if keep_out is None else keep_out)

    try:
        target = target_heading(p0, goal)
    except AtGoal:
        target = x0.theta
    base_schedule = precompute_turning_rates(x0.theta, target, params.N, params.T, params.omega_max)

    halfspaces = []
    for i, poly in enumerate(obstacles):
        res = closest_point(poly, p0, allow_inside=True)
        if res.distance <= params.barrier.active_radius:
            halfspaces.append(halfspace_from_closest(poly, res, p0, source=i))

    sol = None
    for scale in HEADING_BACKOFF:
        schedule = base_schedule if scale == 1.0 else base_schedule.scaled(scale, params.T)
        amap = condense(x0, schedule, params.H, params.T, params.N, params.g)
        hard = (
            velocity_rows(schedule, stance0, params.limits, amap)
            + reachability_rows(schedule, params.limits, amap)
            + maneuverability_rows(schedule, params.limits, amap)
        )
        soft: list[LinearRow] = []
        for hs in halfspaces:
            soft.extend(ldcbf_rows(hs, params.barrier, amap))
        rows = hard + soft
        Hm, gv = build_cost(amap, goal)
        if params.control_weight > 0:
            Hm, gv = _add_control_weight(Hm, gv, amap, params.control_weight)
        problem = qpmod.DenseQP(Hm, gv, rows)
        index = {r.label: i for i, r in enumerate(rows)}
        ws = [(index[lbl], side) for lbl, side in warm_labels if lbl in index] if scale == 1.0 else None
        # barrier rows are tried as hard rows first; slack only when that fails
        sol = qpmod.solve(problem, params.max_iterations, ws)
        if sol.status != qpmod.OPTIMAL and soft:
            sol = qpmod.solve_with_slack(
                problem,
                list(range(len(hard), len(rows))),
                penalty=params.slack_penalty,
                max_iterations=params.max_iterations,
                warm_start=ws,
            )
        if sol.status != qpmod.INFEASIBLE:
            break
    assert sol is not None
    if sol.status == qpmod.INFEASIBLE:
        raise SolverFault("kinematic rows are infeasible for every turning-rate scale")
    if sol.status != qpmod.OPTIMAL:
        raise SolverFault(f"QP terminated with status {sol.status}")

    u = sol.u_star
    states = amap.evaluate(u)
    controls = amap.controls(u)
    margins = {r.label: r.margin(u) for r in rows}
    diag = MpcDiagnostics(
        objective=sol.objective + cost_constant(amap, goal),
        status=sol.status,
        margins=margins,
        max_slack=sol.max_slack,
        solve_time=time.perf_counter() - t_start,
        qp_iterations=sol.iterations,
        warm_started=sol.warm_started,
        heading_scale=scale,
        halfspaces=halfspaces,
        h0=[h_value(hs, p0) for hs in halfspaces],
    )
    labels = [(rows[i].label, s) for i, s in sol.active_sides]
    return MpcResult(controls, states[1:], x0, stance0, schedule, diag, labels)


def _add_control_weight(Hm, gv, amap: AffineStateMap, w: float):
    # penalize each footstep's offset from the CoM at the start of its step
    Hm = Hm.copy()
    gv = gv.copy()
    for k in range(amap.N):
        M, m = amap.position(k)
        D = amap.foot(k) - M
        Hm += 2.0 * w * D.T @ D
        gv += 2.0 * w * D.T @ (-m)
    return Hm, gv
