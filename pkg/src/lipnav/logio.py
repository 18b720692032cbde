"""Newline-delimited JSON episode logs.

Each line is one record with an ``event`` tag: ``header`` first, then
``tick``, ``replan`` and ``step`` records in time order, and a final
``outcome`` record.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Any, Iterator

from .config import world_from_dict, world_to_dict
from .simulator import EpisodeLog, World

LOG_FORMAT = "lipnav-log/1"


def _line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def iter_records(log: EpisodeLog, tick_stride: int = 1, include_timing: bool = True) -> Iterator[dict]:
    """Log records in write order; ``include_timing=False`` drops wall-clock fields."""
    yield {
        "event": "header",
        "format": LOG_FORMAT,
        "mode": log.mode,
        "world": world_to_dict(log.world),
        "rrt_path": [list(p) for p in log.path.waypoints] if log.path else None,
    }
    # merge by time; at equal times ticks come before the replan and step that use them
    events: list[tuple[float, int, int, dict]] = []
    stride = max(1, int(tick_stride))
    n = len(log.ticks)
    for i in range(0, n, stride):
        row = log.ticks[i]
        events.append((float(row[0]), 0, i, {"event": "tick", "t": float(row[0]), "state": [float(v) for v in row[1:]]}))
    if n and (n - 1) % stride:
        row = log.ticks[-1]
        events.append((float(row[0]), 0, n - 1, {"event": "tick", "t": float(row[0]), "state": [float(v) for v in row[1:]]}))
    for j, st in enumerate(log.steps):
        events.append((st.time, 1, j, dict(st.as_dict(), event="step")))
    for j, rp in enumerate(log.replans):
        rec = dict(rp.as_dict(), event="replan")
        if not include_timing:
            rec.pop("solve_time")
        events.append((rp.time, 2, j, rec))
    events.sort(key=lambda e: (e[0], e[1], e[2]))
    for _, _, _, rec in events:
        yield rec
    out = {
        "event": "outcome",
        "outcome": log.outcome,
        "steps": log.step_count,
        "sim_time_s": log.sim_time,
        "violation": list(log.violation) if log.violation else None,
        "message": log.message,
    }
    if include_timing:
        out["wall_time_s"] = log.wall_time
    yield out


def write_log(log: EpisodeLog, path: str | Path | IO[str], tick_stride: int = 1) -> None:
    if hasattr(path, "write"):
        for rec in iter_records(log, tick_stride):
            path.write(_line(rec) + "\n")
        return
    with open(path, "w") as fh:
        write_log(log, fh, tick_stride)


def step_sequence_text(log: EpisodeLog) -> str:
    """Canonical serialization of the committed step sequence (replay comparisons)."""
    return "".join(_line(dict(s.as_dict(), event="step")) + "\n" for s in log.steps)


@dataclass
class LoadedLog:
    mode: str
    world: World
    rrt_path: list[tuple[float, float]] | None
    ticks: list[tuple[float, list[float]]] = field(default_factory=list)
    steps: list[dict] = field(default_factory=list)
    replans: list[dict] = field(default_factory=list)
    outcome: dict[str, Any] = field(default_factory=dict)


def read_log(path: str | Path) -> LoadedLog:
    loaded = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            ev = rec.get("event")
            if ev == "header":
                if rec.get("format") != LOG_FORMAT:
                    raise ValueError(f"{path}:{lineno}: unsupported log format {rec.get('format')!r}")
                rp = rec.get("rrt_path")
                loaded = LoadedLog(rec["mode"], world_from_dict(rec["world"]), [tuple(p) for p in rp] if rp else None)
                continue
            if loaded is None:
                raise ValueError(f"{path}:{lineno}: record before header")
            if ev == "tick":
                loaded.ticks.append((rec["t"], rec["state"]))
            elif ev == "step":
                loaded.steps.append(rec)
            elif ev == "replan":
                loaded.replans.append(rec)
            elif ev == "outcome":
                loaded.outcome = rec
            else:
                raise ValueError(f"{path}:{lineno}: unknown event {ev!r}")
    if loaded is None:
        raise ValueError(f"{path}: empty log")
    return loaded
