"""``lipnav`` command line: gen-env, run, batch, plot."""

from __future__ import annotations

import argparse
import dataclasses
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .config import (
    ScenarioConfig,
    WorldSpec,
    build_world,
    config_to_dict,
    dumps,
    load_config,
    parse_config,
    save_world,
)
from .errors import ConfigError, LipNavError
from .logio import read_log, write_log
from .simulator import GLOBAL, SUBGOAL, EpisodeLog, run_episode
from .svgplot import write_svg

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _seed_range(text: str) -> range:
    """``a:b`` (half-open), ``a-b`` (inclusive) or a single seed."""
    try:
        if ":" in text:
            a, b = text.split(":", 1)
            return range(int(a), int(b))
        if "-" in text.lstrip("-"):
            head = text[0] + text[1:].split("-", 1)[0]
            tail = text[len(head) + 1 :]
            return range(int(head), int(tail) + 1)
        s = int(text)
        return range(s, s + 1)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}; use a:b") from None


def _build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lipnav", description="LIP footstep MPC with half-space barriers: simulation tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-env", help="generate a random obstacle world file")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--count", type=int, default=8, help="number of obstacles")
    g.add_argument("--config", help="take bounds/start/goal/size settings from this config")
    g.add_argument("--out", required=True)

    r = sub.add_parser("run", help="run one closed-loop episode")
    r.add_argument("--config")
    r.add_argument("--mode", choices=(GLOBAL, SUBGOAL))
    r.add_argument("--seed", type=int, help="generate the world from this seed")
    r.add_argument("--out", help="episode log path (NDJSON)")
    r.add_argument("--svg", help="also write an SVG plot here")

    b = sub.add_parser("batch", help="run one episode per seed")
    b.add_argument("--config")
    b.add_argument("--mode", choices=(GLOBAL, SUBGOAL))
    b.add_argument("--seeds", type=_seed_range, required=True, help="seed range a:b (half-open)")
    b.add_argument("--parallelism", type=int, default=1)
    b.add_argument("--out", help="directory for per-seed logs and the report")

    pl = sub.add_parser("plot", help="render an episode log as SVG")
    pl.add_argument("log")
    pl.add_argument("--out", required=True)
    return p


def _load(args) -> ScenarioConfig:
    cfg = load_config(args.config) if args.config else parse_config({})
    if getattr(args, "mode", None):
        cfg = cfg.with_mode(args.mode)
    return cfg


def _summary_line(log: EpisodeLog) -> str:
    s = log.summary()
    return (
        f"outcome={s['outcome']} steps={s['steps']} sim_time_s={s['sim_time_s']:.1f} "
        f"mean_solve_ms={s['mean_solve_ms']:.3f} mode={s['mode']} seed={s['seed']}"
    )


def cmd_gen_env(args) -> int:
    if args.count < 0:
        raise UsageError("--count must be non-negative")
    spec = load_config(args.config).world if args.config else WorldSpec()
    spec = dataclasses.replace(spec, seed=args.seed, n_obstacles=args.count, obstacles=None, file=None)
    world = build_world(spec)
    save_world(world, args.out)
    print(f"wrote {len(world.obstacles)} obstacles to {args.out}")
    return EXIT_OK


def _run_config(cfg: ScenarioConfig) -> EpisodeLog:
    world = build_world(cfg.world)
    return run_episode(world, cfg.mode, cfg.mpc, cfg.rrt, cfg.run)


def cmd_run(args) -> int:
    cfg = _load(args)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    log = _run_config(cfg)
    out = args.out or cfg.output.log_path
    if out:
        write_log(log, out, cfg.output.tick_stride)
    line = _summary_line(log)
    if cfg.output.summary_path:
        Path(cfg.output.summary_path).write_text(line + "\n")
    svg = args.svg or cfg.output.svg_path
    if svg:
        if not out:
            raise UsageError("--svg needs a log (--out) to render from")
        write_svg(read_log(out), svg, goal_tolerance=cfg.run.goal_tolerance)
    print(line)
    return EXIT_OK


def _batch_job(job: tuple[dict, int, str | None]) -> dict:
    raw, seed, out_dir = job
    cfg = parse_config(raw).with_seed(seed)
    row = {"seed": seed, "mode": cfg.mode}
    try:
        log = _run_config(cfg)
    except LipNavError as exc:  # e.g. generation failure: record it, keep going
        row.update(outcome="Error", steps=0, sim_time_s=0.0, mean_solve_ms=0.0, p99_solve_ms=0.0, message=str(exc))
        return row
    if out_dir:
        write_log(log, Path(out_dir) / f"seed_{seed}.ndjson", cfg.output.tick_stride)
    row.update(log.summary())
    row["message"] = log.message
    return row


def run_batch(cfg: ScenarioConfig, seeds: range, parallelism: int = 1, out_dir: str | None = None) -> dict:
    raw = config_to_dict(cfg)
    jobs = [(raw, s, out_dir) for s in seeds]
    if parallelism <= 1 or len(jobs) <= 1:
        rows = [_batch_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=parallelism) as pool:
            rows = list(pool.map(_batch_job, jobs))
    ok = [r for r in rows if r["outcome"] == "GoalReached"]
    steps = [r["steps"] for r in ok]
    solve = [r["mean_solve_ms"] for r in rows if r["outcome"] != "Error"]
    aggregate = {
        "episodes": len(rows),
        "success_rate": len(ok) / len(rows) if rows else 0.0,
        "mean_steps": statistics.fmean(steps) if steps else None,
        "median_steps": statistics.median(steps) if steps else None,
        "mean_solve_ms": statistics.fmean(solve) if solve else None,
        "outcomes": {o: sum(r["outcome"] == o for r in rows) for o in sorted({r["outcome"] for r in rows})},
    }
    return {"mode": cfg.mode, "rows": rows, "aggregate": aggregate}


def _format_table(report: dict) -> str:
    lines = [f"{'seed':>6} {'outcome':<16} {'steps':>5} {'sim_s':>7} {'solve_ms':>9}"]
    for r in report["rows"]:
        lines.append(
            f"{r['seed']:>6} {r['outcome']:<16} {r['steps']:>5} {r['sim_time_s']:>7.1f} {r['mean_solve_ms']:>9.3f}"
        )
    a = report["aggregate"]
    fmt = lambda v, spec: "n/a" if v is None else format(v, spec)  # noqa: E731
    lines.append(
        f"episodes={a['episodes']} success_rate={a['success_rate']:.3f} "
        f"mean_steps={fmt(a['mean_steps'], '.2f')} median_steps={fmt(a['median_steps'], 'g')} "
        f"mean_solve_ms={fmt(a['mean_solve_ms'], '.3f')}"
    )
    return "\n".join(lines)


def cmd_batch(args) -> int:
    cfg = _load(args)
    if args.parallelism < 1:
        raise UsageError("--parallelism must be at least 1")
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
    report = run_batch(cfg, args.seeds, args.parallelism, args.out)
    if args.out:
        (Path(args.out) / "report.json").write_text(dumps(report))
    print(_format_table(report))
    return EXIT_OK


def cmd_plot(args) -> int:
    try:
        log = read_log(args.log)
    except (ValueError, KeyError, ConfigError) as exc:
        print(f"lipnav: cannot parse {args.log}: {exc}", file=sys.stderr)
        return EXIT_IO
    write_svg(log, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


COMMANDS = {"gen-env": cmd_gen_env, "run": cmd_run, "batch": cmd_batch, "plot": cmd_plot}


def main(argv: list[str] | None = None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"lipnav: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        where = f" {exc.filename}" if getattr(exc, "filename", None) else ""
        print(f"lipnav: I/O error{where}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
