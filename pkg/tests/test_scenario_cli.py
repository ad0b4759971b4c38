import json
from pathlib import Path

import pytest

from borderforge.cli import main
from borderforge.errors import ScenarioInvalid
from borderforge.scenario import load_scenario

from conftest import build_tiny_world


def test_run_writes_outputs_and_exits_zero(tiny_world, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", str(tiny_world), "--out", str(out)]) == 0
    for name in ("posterior.pgm", "posterior.meta", "report.json", "session.jsonl"):
        assert (out / name).exists(), name
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert report["borders"][0]["kind"] == "simple"


def test_run_missing_map_exits_one(tmp_path, capsys):
    scenario = {"name": "broken", "seed": 1, "duration": 1.0,
                "prior_map": "maps/nowhere", "spawn": [0.5, 0.5, 0.0]}
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(scenario))
    assert main(["run", str(path), "--out", str(tmp_path / "out")]) == 1
    assert "nowhere" in capsys.readouterr().err


def test_run_is_deterministic_per_seed(tiny_world, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(tiny_world), "--out", str(out_a), "--seed", "9"]) == 0
    assert main(["run", str(tiny_world), "--out", str(out_b), "--seed", "9"]) == 0
    for name in ("posterior.pgm", "posterior.meta", "report.json", "session.jsonl"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name


def test_scenario_loader_validates(tmp_path):
    with pytest.raises(ScenarioInvalid):
        load_scenario(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioInvalid):
        load_scenario(bad)


def test_scenario_laser_interpolation(tiny_world):
    scenario = load_scenario(tiny_world)
    first = scenario.laser_script[0]
    assert scenario.laser_at(-1.0) is None or first.t == 0.0
    mid = scenario.laser_at(first.t)
    assert mid == pytest.approx(first.point, abs=1e-9)


def test_laser_script_gap_goes_dark(tmp_path):
    build_tiny_world(tmp_path)
    data = json.loads((tmp_path / "tiny.json").read_text())
    data["laser_script"] = [
        {"t": 0.0, "x": 1.0, "y": 1.0},
        {"t": 1.0, "x": 2.0, "y": 1.0},
        {"t": 1.0, "off": True},
        {"t": 2.0, "x": 2.5, "y": 1.5},
    ]
    path = tmp_path / "gappy.json"
    path.write_text(json.dumps(data))
    scenario = load_scenario(path)
    assert scenario.laser_at(0.5) == pytest.approx((1.5, 1.0))
    assert scenario.laser_at(1.5) is None
    assert scenario.laser_at(2.5) == pytest.approx((2.5, 1.5))


def test_eval_empty_directory_exits_one(tmp_path, capsys):
    empty = tmp_path / "nothing"
    empty.mkdir()
    assert main(["eval", str(empty), "--out", str(tmp_path / "out")]) == 1


def build_eval_suite(target: Path) -> Path:
    """Three quick borders of different lengths plus shared maps."""
    import numpy as np
    from borderforge.grid import FREE, OCCUPIED, GridOrigin, OccupancyGrid, save_map
    from make_scenarios import base_scenario, teaching_script

    suite = target / "suite"
    maps = suite / "maps"
    maps.mkdir(parents=True, exist_ok=True)
    cells = np.full((90, 160), FREE, dtype=np.uint8)
    cells[:2, :] = cells[-2:, :] = OCCUPIED
    cells[:, :2] = cells[:, -2:] = OCCUPIED
    save_map(OccupancyGrid(0.025, GridOrigin(), cells), maps / "room")
    for i, length in enumerate((0.9, 1.3, 1.7), start=1):
        spawn, script, events, duration, _ = teaching_script(
            [(0.9, 0.3 + 0.4 * i), (0.9 + length, 0.3 + 0.4 * i)], None, side=1.0)
        scenario = base_scenario(f"mini{i}", seed=i, spawn=spawn, script=script,
                                 events=events, duration=duration,
                                 prior="maps/room", expect={"borders": 1})
        (suite / f"mini{i}.json").write_text(json.dumps(scenario) + "\n")
    return suite


def test_eval_suite_writes_csv_and_fit(tmp_path, capsys):
    suite = build_eval_suite(tmp_path)
    out = tmp_path / "evalout"
    assert main(["eval", str(suite), "--out", str(out)]) == 0
    rows = (out / "summary.csv").read_text().strip().splitlines()
    assert len(rows) == 4  # header + three scenarios
    assert rows[0].startswith("scenario,")
    fit = json.loads((out / "fit.json").read_text())
    assert fit["n"] == 3
    assert "slope" in fit and "r_squared" in fit


def test_eval_reports_failure_with_exit_two(tmp_path):
    suite = build_eval_suite(tmp_path)
    # a scenario whose laser never appears cannot finalize a border
    broken = json.loads((suite / "mini1.json").read_text())
    broken["name"] = "dark"
    broken["laser_script"] = []
    (suite / "zdark.json").write_text(json.dumps(broken) + "\n")
    out = tmp_path / "evalout2"
    assert main(["eval", str(suite), "--out", str(out)]) == 2
    rows = (out / "summary.csv").read_text().strip().splitlines()
    assert len(rows) == 5
    dark_row = next(r for r in rows if r.startswith("dark,"))
    assert dark_row.rstrip().endswith("False")


def test_render_dumps_frame_files(tiny_world, tmp_path):
    out = tmp_path / "frames"
    assert main(["render", str(tiny_world), "--time", "1.0",
                 "--out", str(out), "--annotate"]) == 0
    pngs = list(out.glob("frame_*.png"))
    pgms = list(out.glob("depth_*.pgm"))
    assert len(pngs) == 1 and len(pgms) == 1
    assert pgms[0].read_bytes().startswith(b"P5\n")


def test_eval_plan_reports_before_after_intersections(scenario_dir, tmp_path):
    suite = tmp_path / "one"
    suite.mkdir()
    (suite / "maps").symlink_to(scenario_dir / "maps")
    (suite / "correctness.json").write_text(
        (scenario_dir / "correctness.json").read_text())
    out = tmp_path / "planout"
    assert main(["eval", str(suite), "--out", str(out),
                 "--plan", "4.6,3.0,4.6,0.5"]) == 0
    plan = json.loads((out / "correctness" / "plan.json").read_text())
    assert plan["before"]["intersects_taught"] is True
    assert plan["after"]["intersects_taught"] is False
    assert plan["after"]["length_m"] > plan["before"]["length_m"]
