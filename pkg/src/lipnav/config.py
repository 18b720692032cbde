"""Scenario configuration: JSON with unit-suffixed keys, strict validation."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .constraints import KinematicLimits, Stance
from .errors import ConfigError
from .geometry import ConvexPolygon
from .ldcbf import BarrierParams
from .mpc import MpcParams
from .rrt import RrtParams
from .simulator import DEFAULT_BOUNDS, GLOBAL, SUBGOAL, RunParams, World, generate_environment

WORLD_FORMAT = "lipnav-world/1"


@dataclass(frozen=True)
class WorldSpec:
    seed: int | None = 0
    n_obstacles: int = 8
    obstacles: tuple[tuple[float, ...], ...] | None = None  # flat CCW vertex lists
    file: str | None = None
    bounds: tuple[float, float, float, float] = DEFAULT_BOUNDS
    start: tuple[float, float] = (0.0, 0.0)
    goal: tuple[float, float] = (10.0, 10.0)
    size_range: tuple[float, float] = (0.4, 1.0)
    clearance: float = 0.5
    inflation: float = 0.35


@dataclass(frozen=True)
class OutputSpec:
    log_path: str | None = None
    summary_path: str | None = None
    svg_path: str | None = None
    tick_stride: int = 1


@dataclass(frozen=True)
class ScenarioConfig:
    mode: str = GLOBAL
    world: WorldSpec = field(default_factory=WorldSpec)
    mpc: MpcParams = field(default_factory=MpcParams)
    rrt: RrtParams = field(default_factory=RrtParams)
    run: RunParams = field(default_factory=RunParams)
    output: OutputSpec = field(default_factory=OutputSpec)

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return dataclasses.replace(self, world=dataclasses.replace(self.world, seed=seed, obstacles=None, file=None))

    def with_mode(self, mode: str) -> "ScenarioConfig":
        return dataclasses.replace(self, mode=mode)


# config key -> (attribute, kind); kinds: float, int, bool, str, opt_float, opt_int, opt_str, vec2, vec4, stance, polys
_WORLD_KEYS = {
    "seed": ("seed", "opt_int"),
    "n_obstacles": ("n_obstacles", "int"),
    "obstacles_m": ("obstacles", "polys"),
    "file": ("file", "opt_str"),
    "bounds_m": ("bounds", "vec4"),
    "start_m": ("start", "vec2"),
    "goal_m": ("goal", "vec2"),
    "size_range_m": ("size_range", "vec2"),
    "clearance_m": ("clearance", "float"),
    "inflation_m": ("inflation", "float"),
}
_MPC_KEYS = {
    "horizon_steps": ("N", "int"),
    "step_duration_s": ("T", "float"),
    "com_height_m": ("H", "float"),
    "gravity_mps2": ("g", "float"),
    "omega_max_radps": ("omega_max", "float"),
    "slack_penalty": ("slack_penalty", "float"),
    "control_weight": ("control_weight", "float"),
    "max_iterations": ("max_iterations", "int"),
}
_LIMIT_KEYS = {
    "v_x_min_mps": ("v_x_min", "float"),
    "v_x_max_mps": ("v_x_max", "float"),
    "v_y_min_mps": ("v_y_min", "float"),
    "v_y_max_mps": ("v_y_max", "float"),
    "l_max_m": ("l_max", "float"),
    "alpha": ("alpha", "float"),
}
_BARRIER_KEYS = {
    "gamma": ("gamma", "float"),
    "active_radius_m": ("active_radius", "float"),
}
_RRT_KEYS = {
    "step_size_m": ("step_size", "float"),
    "goal_bias": ("goal_bias", "float"),
    "max_nodes": ("max_nodes", "int"),
    "goal_tolerance_m": ("goal_tolerance", "float"),
    "seed": ("seed", "int"),
    "inflation_m": ("inflation", "float"),
    "lookahead_m": ("lookahead", "float"),
}
_RUN_KEYS = {
    "dt_s": ("dt", "float"),
    "replan_period_s": ("replan_period", "float"),
    "goal_tolerance_m": ("goal_tolerance", "float"),
    "max_steps": ("max_steps", "int"),
    "initial_stance": ("initial_stance", "stance"),
    "initial_heading_rad": ("initial_heading", "opt_float"),
    "disturbance_mps": ("disturbance", "float"),
    "disturbance_seed": ("disturbance_seed", "int"),
    "omega_update": ("omega_update", "str"),
}
_OUTPUT_KEYS = {
    "log_path": ("log_path", "opt_str"),
    "summary_path": ("summary_path", "opt_str"),
    "svg_path": ("svg_path", "opt_str"),
    "tick_stride": ("tick_stride", "int"),
}


def _coerce(value: Any, kind: str, path: str):
    def num(v, p):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(p, f"expected a number, got {v!r}")
        if not math.isfinite(v):
            raise ConfigError(p, "must be finite")
        return float(v)

    if kind.startswith("opt_"):
        if value is None:
            return None
        kind = kind[4:]
    if kind == "float":
        return num(value, path)
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return value
    if kind == "str":
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    if kind in ("vec2", "vec4"):
        n = 2 if kind == "vec2" else 4
        if not isinstance(value, list) or len(value) != n:
            raise ConfigError(path, f"expected a list of {n} numbers")
        return tuple(num(v, f"{path}[{i}]") for i, v in enumerate(value))
    if kind == "stance":
        try:
            return Stance(value)
        except ValueError:
            raise ConfigError(path, f"expected 'left' or 'right', got {value!r}") from None
    if kind == "polys":
        if value is None:
            return None
        if not isinstance(value, list):
            raise ConfigError(path, "expected a list of flat vertex lists")
        out = []
        for i, flat in enumerate(value):
            p = f"{path}[{i}]"
            if not isinstance(flat, list) or len(flat) < 6 or len(flat) % 2:
                raise ConfigError(p, "expected an even-length list of at least 6 coordinates")
            out.append(tuple(num(v, f"{p}[{j}]") for j, v in enumerate(flat)))
        return tuple(out)
    raise AssertionError(kind)


def _section(raw: Any, keys: dict, path: str) -> dict:
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object")
    out = {}
    for k, v in raw.items():
        if k not in keys:
            raise ConfigError(f"{path}.{k}", "unknown key")
        attr, kind = keys[k]
        out[attr] = _coerce(v, kind, f"{path}.{k}")
    return out


def _build(cls, kwargs: dict, path: str):
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


def parse_config(raw: Any) -> ScenarioConfig:
    if not isinstance(raw, dict):
        raise ConfigError("", "configuration must be a JSON object")
    allowed = {"mode", "world", "mpc", "limits", "barrier", "rrt", "run", "output"}
    for k in raw:
        if k not in allowed:
            raise ConfigError(k, "unknown key")
    mode = raw.get("mode", GLOBAL)
    if mode not in (GLOBAL, SUBGOAL):
        raise ConfigError("mode", f"expected 'global' or 'subgoal', got {mode!r}")
    limits = _build(KinematicLimits, _section(raw.get("limits"), _LIMIT_KEYS, "limits"), "limits")
    barrier = _build(BarrierParams, _section(raw.get("barrier"), _BARRIER_KEYS, "barrier"), "barrier")
    mpc_kwargs = _section(raw.get("mpc"), _MPC_KEYS, "mpc")
    mpc = _build(MpcParams, dict(mpc_kwargs, limits=limits, barrier=barrier), "mpc")
    return ScenarioConfig(
        mode=mode,
        world=_build(WorldSpec, _section(raw.get("world"), _WORLD_KEYS, "world"), "world"),
        mpc=mpc,
        rrt=_build(RrtParams, _section(raw.get("rrt"), _RRT_KEYS, "rrt"), "rrt"),
        run=_build(RunParams, _section(raw.get("run"), _RUN_KEYS, "run"), "run"),
        output=_build(OutputSpec, _section(raw.get("output"), _OUTPUT_KEYS, "output"), "output"),
    )


def _dump_section(obj, keys: dict) -> dict:
    out = {}
    for k, (attr, kind) in keys.items():
        v = getattr(obj, attr)
        if kind == "stance":
            v = v.value
        elif kind == "polys" and v is not None:
            v = [list(p) for p in v]
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def config_to_dict(cfg: ScenarioConfig) -> dict:
    return {
        "mode": cfg.mode,
        "world": _dump_section(cfg.world, _WORLD_KEYS),
        "mpc": _dump_section(cfg.mpc, _MPC_KEYS),
        "limits": _dump_section(cfg.mpc.limits, _LIMIT_KEYS),
        "barrier": _dump_section(cfg.mpc.barrier, _BARRIER_KEYS),
        "rrt": _dump_section(cfg.rrt, _RRT_KEYS),
        "run": _dump_section(cfg.run, _RUN_KEYS),
        "output": _dump_section(cfg.output, _OUTPUT_KEYS),
    }


def dumps(obj: Any) -> str:
    """Deterministic JSON; floats use the shortest exact round-trip form."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def load_config(path: str | Path) -> ScenarioConfig:
    text = Path(path).read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    cfg = parse_config(raw)
    if cfg.world.file and not Path(cfg.world.file).is_absolute():
        resolved = str((Path(path).parent / cfg.world.file).resolve())
        cfg = dataclasses.replace(cfg, world=dataclasses.replace(cfg.world, file=resolved))
    return cfg


# -- world files ------------------------------------------------------------


def world_to_dict(world: World) -> dict:
    return {
        "format": WORLD_FORMAT,
        "seed": world.seed,
        "bounds_m": list(world.bounds),
        "start_m": list(world.start),
        "goal_m": list(world.goal),
        "inflation_m": world.inflation,
        "obstacles_m": [p.flat() for p in world.obstacles],
    }


def world_from_dict(raw: Any, path: str = "world") -> World:
    if not isinstance(raw, dict):
        raise ConfigError(path, "expected an object")
    if raw.get("format") != WORLD_FORMAT:
        raise ConfigError(f"{path}.format", f"expected {WORLD_FORMAT!r}")
    keys = dict(_WORLD_KEYS)
    keys["format"] = ("format", "str")
    vals = _section(raw, keys, path)
    polys = []
    for i, flat in enumerate(vals.get("obstacles") or ()):
        try:
            polys.append(ConvexPolygon(list(zip(flat[0::2], flat[1::2]))))
        except ValueError as exc:
            raise ConfigError(f"{path}.obstacles_m[{i}]", str(exc)) from None
    return World.from_obstacles(
        polys,
        inflation=vals.get("inflation", 0.35),
        bounds=vals.get("bounds", DEFAULT_BOUNDS),
        start=vals.get("start", (0.0, 0.0)),
        goal=vals.get("goal", (10.0, 10.0)),
        seed=vals.get("seed"),
    )


def save_world(world: World, path: str | Path) -> None:
    Path(path).write_text(dumps(world_to_dict(world)))


def load_world(path: str | Path) -> World:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(str(path), f"invalid JSON: {exc}") from None
    return world_from_dict(raw, str(path))


def build_world(spec: WorldSpec) -> World:
    if spec.file:
        return load_world(spec.file)
    if spec.obstacles is not None:
        polys = []
        for i, flat in enumerate(spec.obstacles):
            try:
                polys.append(ConvexPolygon(list(zip(flat[0::2], flat[1::2]))))
            except ValueError as exc:
                raise ConfigError(f"world.obstacles_m[{i}]", str(exc)) from None
        return World.from_obstacles(polys, spec.inflation, spec.bounds, spec.start, spec.goal, spec.seed)
    return generate_environment(
        spec.seed if spec.seed is not None else 0,
        spec.n_obstacles,
        bounds=spec.bounds,
        size_range=spec.size_range,
        clearance=spec.clearance,
        inflation=spec.inflation,
        start=spec.start,
        goal=spec.goal,
    )
