"""Acceptance suite: one test per shipped claim, each printing a verdict.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines.
"""
import itertools
import json
import math
import time

import numpy as np
import pytest

from borderforge.border import bresenham, partition_map
from borderforge.camera import CameraIntrinsics, CameraMount, CameraPose
from borderforge.cli import main
from borderforge.detect import detect_laser_point
from borderforge.errors import NoPath, PartitionFailed
from borderforge.evaluate import fit_time_length, run_scenario, virtual_area_cells
from borderforge.grid import FREE, OCCUPIED, UNKNOWN, GridOrigin, OccupancyGrid, world_to_cell
from borderforge.planner import path_intersects, plan_path
from borderforge.projection import forward_project, inverse_project
from borderforge.scenario import load_scenario
from borderforge.scene import Distractor, FloorTexture, LaserSpot, SceneSpec, \
    project_floor_point, render_frame
from borderforge.simulate import Simulation

from test_border import recursive_flood_fill
from test_fsm import run_event_string, session_invariants, NEXT, PREV
from test_projection import world_recovery_error

COMMANDED_SPEED = 0.12


def report(line: str) -> None:
    print(f"\nACCEPTANCE {line}")


@pytest.fixture(scope="module")
def carpet_run(scenario_dir):
    scenario = load_scenario(scenario_dir / "carpet.json")
    started = time.monotonic()
    sim = Simulation(scenario)
    sim.run()
    elapsed = time.monotonic() - started
    return sim, sim.build_report(), elapsed


def test_carpet_jaccard_and_runtime(carpet_run):
    """Scripted carpet teaching must reach the accuracy gate inside the
    wall-clock budget."""
    _, rep, elapsed = carpet_run
    assert rep.errors == []
    assert rep.jaccard is not None and rep.jaccard >= 0.85
    assert elapsed < 10.0
    report(f"carpet: jaccard={rep.jaccard:.4f} (>=0.85), "
           f"runtime={elapsed:.2f}s (<10s)  PASS")


def test_correctness_costmap_change(scenario_dir):
    """Teaching a separating curve plus a carpet loop changes navigation:
    the old path is blocked, detours avoid keep-off cells, and goals inside
    a keep-off area become unreachable."""
    scenario = load_scenario(scenario_dir / "correctness.json")
    sim = Simulation(scenario)
    sim.run()
    rep = sim.build_report()
    assert rep.errors == []
    assert [b.kind for b in rep.borders] == ["simple", "closed"]

    prior, posterior = sim.physical_map, sim.session.prior_map
    start = world_to_cell(prior, (4.6, 3.0))
    goal = world_to_cell(prior, (4.6, 0.5))
    carpet_cells = {(x, y) for x in range(144, 224) for y in range(40, 90)}
    before = plan_path(prior, start, goal)
    assert path_intersects(before, carpet_cells)
    after = plan_path(posterior, start, goal)
    keep_off = virtual_area_cells(prior, posterior)
    assert not path_intersects(after, keep_off)
    with pytest.raises(NoPath):
        plan_path(posterior, start, world_to_cell(posterior, (4.6, 1.6)))
    with pytest.raises(NoPath):
        plan_path(posterior, start, world_to_cell(posterior, (0.7, 1.7)))
    report("correctness: pre-path crosses carpet, post-path avoids keep-off, "
           "keep-off goals unreachable  PASS")


def test_teaching_time_linear_in_border_length(scenario_dir):
    """Record-time vs border length over the ten-border suite: linear with
    slope near 1/commanded-speed."""
    reports = []
    for path in sorted((scenario_dir / "suite").glob("border*.json")):
        rep = run_scenario(load_scenario(path))
        assert rep.errors == [], path.name
        reports.append(rep)
    assert len(reports) == 10
    lengths = [r.border_length for r in reports]
    assert min(lengths) <= 4.5 and max(lengths) >= 11.0
    fit = fit_time_length(reports)
    expected_slope = 1.0 / COMMANDED_SPEED
    assert fit.r_squared >= 0.95
    assert abs(fit.slope - expected_slope) <= 0.15 * expected_slope
    report(f"teaching time: slope={fit.slope:.2f} s/m "
           f"(target {expected_slope:.2f} +-15%), R^2={fit.r_squared:.4f} (>=0.95)  PASS")


def test_detection_suite_1000_spots_500_distractors():
    intr = CameraIntrinsics().scaled(0.5)
    mount = CameraMount()
    rng = np.random.default_rng(4242)
    detected = 0
    errors = []
    for i in range(1000):
        pose = CameraPose(float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)),
                          float(rng.uniform(-math.pi, math.pi)), mount)
        distance = float(rng.uniform(0.5, 3.0))
        lateral = float(rng.uniform(-0.35, 0.35)) * distance
        spot = (pose.x + math.cos(pose.yaw) * distance - math.sin(pose.yaw) * lateral,
                pose.y + math.sin(pose.yaw) * distance + math.cos(pose.yaw) * lateral)
        truth = project_floor_point(spot, intr, pose)
        if truth is None:
            spot = (pose.x + math.cos(pose.yaw) * distance,
                    pose.y + math.sin(pose.yaw) * distance)
            truth = project_floor_point(spot, intr, pose)
        kind = "noise" if i % 2 == 0 else "checker"
        scene = SceneSpec(floor=FloorTexture(kind=kind, seed=i),
                          laser=LaserSpot(*spot))
        found = detect_laser_point(render_frame(scene, intr, pose))
        if found is not None:
            detected += 1
            errors.append(math.dist(found, truth))
    rate = detected / 1000.0
    median_err = float(np.median(errors))
    assert rate >= 0.99
    assert median_err <= 1.0

    false_positives = 0
    kinds = ["matte_rect", "specular_dot", "big_blob", "strip"]
    for i in range(500):
        pose = CameraPose(0.0, 0.0, 0.0, mount)
        kind = kinds[i % 4]
        d = float(rng.uniform(0.7, 2.5))
        off = float(rng.uniform(-0.3, 0.3))
        if kind == "matte_rect":
            distractor = Distractor(kind, d - 0.2, off - 0.2, d + 0.2, off + 0.2,
                                    color=(140, 30, 30))
        elif kind == "strip":
            distractor = Distractor(kind, d, off, d + 0.12, off + 0.03,
                                    size=0.004, color=(255, 20, 20))
        elif kind == "big_blob":
            distractor = Distractor(kind, d, off, size=0.12, color=(255, 20, 20))
        else:
            distractor = Distractor(kind, d, off, size=0.012)
        scene = SceneSpec(floor=FloorTexture(seed=10_000 + i),
                          distractors=(distractor,))
        if detect_laser_point(render_frame(scene, intr, pose)) is not None:
            false_positives += 1
    assert false_positives == 0
    report(f"detection: rate={rate:.3f} (>=0.99), median error={median_err:.3f}px "
           f"(<=1), false positives={false_positives}/500 (=0)  PASS")


def test_projection_identity_and_recovery():
    intr = CameraIntrinsics()
    worst = 0.0
    for z in (0.1, 1.0, 10.0):
        for u in np.linspace(0, intr.width - 1, 100):
            for v in np.linspace(0, intr.height - 1, 100):
                uu, vv = forward_project(inverse_project((u, v), z, intr), intr)
                worst = max(worst, abs(uu - u), abs(vv - v))
    assert worst < 1e-9
    recovery = [world_recovery_error(d, intr) for d in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)]
    assert max(recovery) <= 0.01
    report(f"projection: identity error={worst:.2e}px (<1e-9), "
           f"world recovery max={max(recovery) * 100:.2f}cm (<=1cm)  PASS")


def test_partition_oracle_and_conservation():
    rng = np.random.default_rng(31337)
    exact_matches = 0
    conservation_checks = 0
    for _ in range(200):
        w, h = int(rng.integers(6, 33)), int(rng.integers(6, 33))
        cells = rng.choice([FREE, FREE, FREE, OCCUPIED, UNKNOWN],
                           size=(h, w)).astype(np.uint8)
        grid = OccupancyGrid(1.0, GridOrigin(), cells)
        vertices = [(int(rng.integers(0, w)), int(rng.integers(0, h)))
                    for _ in range(int(rng.integers(2, 6)))]
        border = set()
        for a, b in zip(vertices, vertices[1:]):
            border.update(bresenham(a, b))
        free_cells = [(x, y) for x in range(w) for y in range(h)
                      if cells[y, x] == FREE and (x, y) not in border]
        if not free_cells:
            continue
        seed = free_cells[int(rng.integers(0, len(free_cells)))]
        expected = recursive_flood_fill(grid, border, seed)
        try:
            result = partition_map(grid, border, (seed[0] + 0.5, seed[1] + 0.5))
        except PartitionFailed:
            assert expected == set(free_cells)
            exact_matches += 1
            continue
        assert set(result.connected) == expected
        exact_matches += 1
        from borderforge.border import build_posterior
        posterior = build_posterior(grid, result)
        touched = set(result.connected) | set(result.border_cells)
        diff = posterior.cells != grid.cells
        ys, xs = np.nonzero(diff)
        assert {(int(x), int(y)) for x, y in zip(xs, ys)} <= touched
        conservation_checks += 1
    assert exact_matches >= 190
    report(f"partition: {exact_matches} random grids match the recursive oracle "
           f"exactly; conservation exact on {conservation_checks} posteriors  PASS")


def test_fsm_model_check_acceptance():
    strings = 0
    feedback_ok = 0
    for length in range(1, 7):
        for events in itertools.product([NEXT, PREV], repeat=length):
            session = run_event_string(events)
            session_invariants(session)
            changes = sum(1 for i, ev in enumerate(events)
                          if not (ev is PREV and _state_before(events, i) == "start"))
            assert len(session.feedback_log) == changes, events
            feedback_ok += 1
            strings += 1
    assert strings == 126
    report(f"fsm: {strings} event strings consistent, feedback == state changes "
           f"on all {feedback_ok}  PASS")


def _state_before(events, index) -> str:
    state = "start"
    table = {("start", NEXT): "record", ("start", PREV): "start",
             ("record", NEXT): "keep_off", ("record", PREV): "start",
             ("keep_off", NEXT): "start", ("keep_off", PREV): "record"}
    for ev in events[:index]:
        state = table[(state, ev)]
    return state


def test_run_determinism_byte_identical(scenario_dir, tmp_path):
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(scenario_dir / "carpet.json"),
                 "--out", str(out_a), "--seed", "7"]) == 0
    assert main(["run", str(scenario_dir / "carpet.json"),
                 "--out", str(out_b), "--seed", "7"]) == 0
    names = ("posterior.pgm", "posterior.meta", "report.json", "session.jsonl")
    for name in names:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
    report("determinism: two seeded carpet runs byte-identical across "
           f"{len(names)} outputs  PASS")
