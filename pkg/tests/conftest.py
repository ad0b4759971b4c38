import json
import math
import sys
from pathlib import Path

import pytest

REPO = Path(__file__).resolve().parent.parent
SCENARIOS = REPO / "scenarios"
sys.path.insert(0, str(REPO / "scripts"))

from borderforge.camera import CameraIntrinsics, CameraMount
from borderforge.projection import CameraPoint3D


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    assert (SCENARIOS / "carpet.json").exists(), "run scripts/make_scenarios.py first"
    return SCENARIOS


@pytest.fixture(scope="session")
def small_camera() -> CameraIntrinsics:
    """The 320x240 camera the shipped scenarios use."""
    return CameraIntrinsics().scaled(0.5)


@pytest.fixture
def mount() -> CameraMount:
    return CameraMount()


def camera_point_for(forward: float, left: float,
                     mount: CameraMount = CameraMount()) -> CameraPoint3D:
    """Camera-frame point of the floor location (forward, left) in the
    robot frame; used to drive the follow controller directly."""
    cp, sp = math.cos(mount.pitch), math.sin(mount.pitch)
    fwd = forward - mount.forward
    return CameraPoint3D(x=-left, y=mount.height * cp - fwd * sp,
                         z=fwd * cp + mount.height * sp)


def build_tiny_world(target: Path) -> Path:
    """A 3.0 m x 2.25 m walled room with one short taught line; much faster
    to simulate than the lab scenarios."""
    import numpy as np
    from borderforge.grid import FREE, OCCUPIED, GridOrigin, OccupancyGrid, save_map
    from make_scenarios import base_scenario, teaching_script

    maps = target / "maps"
    maps.mkdir(parents=True, exist_ok=True)
    cells = np.full((90, 120), FREE, dtype=np.uint8)
    cells[:2, :] = cells[-2:, :] = OCCUPIED
    cells[:, :2] = cells[:, -2:] = OCCUPIED
    save_map(OccupancyGrid(0.025, GridOrigin(), cells), maps / "room")

    spawn, script, events, duration, _ = teaching_script(
        [(0.9, 0.6), (2.0, 0.6)], None, side=1.0)
    scenario = base_scenario("tiny", seed=3, spawn=spawn, script=script,
                             events=events, duration=duration,
                             prior="maps/room", expect={"borders": 1})
    (target / "tiny.json").write_text(json.dumps(scenario, indent=2) + "\n")
    return target / "tiny.json"


@pytest.fixture(scope="session")
def tiny_world(tmp_path_factory) -> Path:
    """Directory holding the tiny scenario; returns the scenario path."""
    return build_tiny_world(tmp_path_factory.mktemp("tiny_world"))
