import json
import subprocess
import sys

import pytest

from lipnav.cli import main
from lipnav.config import load_world

FAST = {"world": {"goal_m": [4.0, 4.0], "n_obstacles": 3, "bounds_m": [-1, -1, 5, 5]}}


@pytest.fixture
def fast_cfg(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(FAST))
    return p


class TestGenEnv:
    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["gen-env", "--seed", "1", "--count", "8", "--out", str(a)]) == 0
        assert main(["gen-env", "--seed", "1", "--count", "8", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        world = load_world(a)
        assert len(world.obstacles) == 8
        assert len(json.loads(a.read_text())["obstacles_m"]) == 8

    def test_empty_world(self, tmp_path):
        p = tmp_path / "e.json"
        assert main(["gen-env", "--seed", "1", "--count", "0", "--out", str(p)]) == 0
        assert load_world(p).obstacles == []

    def test_unwritable(self, tmp_path, capsys):
        out = tmp_path / "missing" / "w.json"
        assert main(["gen-env", "--out", str(out)]) == 2
        assert str(out) in capsys.readouterr().err


class TestRun:
    def test_summary_and_artifacts(self, fast_cfg, tmp_path, capsys):
        log, svg = tmp_path / "ep.ndjson", tmp_path / "ep.svg"
        code = main(["run", "--config", str(fast_cfg), "--seed", "2", "--out", str(log), "--svg", str(svg)])
        assert code == 0
        line = capsys.readouterr().out.strip().splitlines()[-1]
        assert line.startswith("outcome=GoalReached steps=")
        assert "sim_time_s=" in line and "mean_solve_ms=" in line
        assert log.exists() and svg.read_text().startswith("<svg")

    def test_subgoal_mode(self, fast_cfg, capsys):
        assert main(["run", "--config", str(fast_cfg), "--seed", "2", "--mode", "subgoal"]) == 0
        assert "mode=subgoal" in capsys.readouterr().out

    def test_outcome_does_not_change_exit_code(self, tmp_path, capsys):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"run": {"max_steps": 3}, "world": {"n_obstacles": 0}}))
        assert main(["run", "--config", str(p)]) == 0
        assert "outcome=Timeout" in capsys.readouterr().out

    def test_malformed_config(self, tmp_path, capsys):
        p = tmp_path / "bad.json"
        p.write_text(json.dumps({"limits": {"v_x_max_mps": "fast"}}))
        assert main(["run", "--config", str(p)]) == 1
        assert "limits.v_x_max_mps" in capsys.readouterr().err

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "nope.json")]) == 2

    def test_usage_errors(self, capsys):
        assert main([]) == 1
        assert main(["run", "--mode", "sideways"]) == 1
        assert main(["batch", "--seeds", "x:y"]) == 1
        assert main(["batch", "--seeds", "0:1", "--parallelism", "0"]) == 1


class TestBatch:
    def test_parallel_matches_serial(self, fast_cfg, tmp_path):
        d1, d2 = tmp_path / "p1", tmp_path / "p2"
        assert main(["batch", "--config", str(fast_cfg), "--seeds", "0:4", "--parallelism", "1", "--out", str(d1)]) == 0
        assert main(["batch", "--config", str(fast_cfg), "--seeds", "0:4", "--parallelism", "2", "--out", str(d2)]) == 0
        r1 = json.loads((d1 / "report.json").read_text())
        r2 = json.loads((d2 / "report.json").read_text())
        strip = lambda rows: [{k: v for k, v in r.items() if "solve" not in k} for r in rows]  # noqa: E731
        assert strip(r1["rows"]) == strip(r2["rows"])
        assert [r["seed"] for r in r1["rows"]] == [0, 1, 2, 3]
        for s in range(4):
            steps1 = [l for l in (d1 / f"seed_{s}.ndjson").read_text().splitlines() if '"event":"step"' in l]
            steps2 = [l for l in (d2 / f"seed_{s}.ndjson").read_text().splitlines() if '"event":"step"' in l]
            assert steps1 == steps2
        agg = r1["aggregate"]
        assert agg["episodes"] == 4 and 0 <= agg["success_rate"] <= 1

    def test_empty_range(self, capsys):
        assert main(["batch", "--seeds", "5:5"]) == 0
        assert "episodes=0" in capsys.readouterr().out

    def test_generation_failure_recorded(self, tmp_path, capsys):
        p = tmp_path / "c.json"
        p.write_text(json.dumps({"world": {"n_obstacles": 500, "bounds_m": [-1, -1, 3, 3], "goal_m": [2, 2]}}))
        assert main(["batch", "--config", str(p), "--seeds", "0:1"]) == 0
        assert "Error" in capsys.readouterr().out


class TestPlot:
    def test_plot_from_log(self, fast_cfg, tmp_path):
        log, svg = tmp_path / "ep.ndjson", tmp_path / "plot.svg"
        assert main(["run", "--config", str(fast_cfg), "--out", str(log)]) == 0
        assert main(["plot", str(log), "--out", str(svg)]) == 0
        assert "<polyline" in svg.read_text()

    def test_missing_log(self, tmp_path):
        assert main(["plot", str(tmp_path / "none.ndjson"), "--out", str(tmp_path / "x.svg")]) == 2

    def test_garbage_log(self, tmp_path):
        p = tmp_path / "g.ndjson"
        p.write_text("hello\n")
        assert main(["plot", str(p), "--out", str(tmp_path / "x.svg")]) == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "w.json"
    proc = subprocess.run(
        [sys.executable, "-m", "lipnav.cli", "gen-env", "--seed", "3", "--count", "2", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(load_world(out).obstacles) == 2
