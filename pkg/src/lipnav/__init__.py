"""Footstep MPC for a linear inverted pendulum walker with half-space barriers."""

from .constraints import KinematicLimits, Stance
from .geometry import ConvexPolygon, Point2
from .heading import precompute_turning_rates
from .ldcbf import BarrierParams, HalfSpace, build_halfspace
from .lip import LipControl, LipState, step_to_step
from .mpc import MpcParams, Planner, plan
from .qp import DenseQP, QpSolution, solve, solve_with_slack
from .rrt import RrtParams, plan_path
from .simulator import RunParams, World, generate_environment, run_episode

__version__ = "0.1.0"

__all__ = [
    "BarrierParams",
    "ConvexPolygon",
    "DenseQP",
    "HalfSpace",
    "KinematicLimits",
    "LipControl",
    "LipState",
    "MpcParams",
    "Planner",
    "Point2",
    "QpSolution",
    "RrtParams",
    "RunParams",
    "Stance",
    "World",
    "build_halfspace",
    "generate_environment",
    "plan",
    "plan_path",
    "precompute_turning_rates",
    "run_episode",
    "solve",
    "solve_with_slack",
    "step_to_step",
]
