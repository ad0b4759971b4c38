"""Scenario files: JSON descriptions of a map, a scene, and a scripted run.

A scenario bundles the prior map, optional ground-truth map, camera and
controller configuration, the scene (floor texture, distractors, walls),
a timed laser script with visibility gaps, and timed next/previous events.
See docs/scenario_format.md for the schema.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from .camera import CameraIntrinsics, CameraMount
from .detect import DetectionParams
from .errors import ScenarioInvalid
from .fsm import TransitionEvent
from .grid import WorldPoint
from .robot import ControllerParams, KinematicLimits, RobotPose
from .scene import Distractor, FloorTexture, SceneSpec, WallBox

# Laser positions are snapped to a micrometer grid so that scripted runs
# and protocol-driven runs (which round-trip through normalized
# coordinates) see bit-identical values.
LASER_QUANTUM = 1e-6


def quantize(value: float) -> float:
    return round(value / LASER_QUANTUM) * LASER_QUANTUM


@dataclass(frozen=True)
class LaserWaypoint:
    t: float
    point: WorldPoint | None  # None = pointer switched off


@dataclass(frozen=True)
class TimedEvent:
    t: float
    event: TransitionEvent


@dataclass
class Scenario:
    name: str
    seed: int
    dt: float
    duration: float
    perception_every: int
    pose_noise_sigma: float  # localization-noise std (m) on the belief pose
    prior_map_path: Path
    ground_truth_path: Path | None
    spawn: RobotPose
    intrinsics: CameraIntrinsics
    mount: CameraMount
    controller: ControllerParams
    limits: KinematicLimits
    detection: DetectionParams
    scene: SceneSpec
    laser_script: list[LaserWaypoint] = field(default_factory=list)
    events: list[TimedEvent] = field(default_factory=list)
    expect: dict = field(default_factory=dict)
    laser_radius: float = 0.0025

    def laser_at(self, t: float) -> WorldPoint | None:
        """Piecewise-linear spot position at time t; None inside gaps,
        before the first waypoint, or after a final off waypoint."""
        script = self.laser_script
        if not script or t < script[0].t:
            return None
        for i in range(len(script) - 1):
            a, b = script[i], script[i + 1]
            if t < b.t:
                if a.point is None:
                    return None
                if b.point is None or b.t <= a.t:
                    return (quantize(a.point[0]), quantize(a.point[1]))
                frac = (t - a.t) / (b.t - a.t)
                return (quantize(a.point[0] + frac * (b.point[0] - a.point[0])),
                        quantize(a.point[1] + frac * (b.point[1] - a.point[1])))
        last = script[-1].point
        if last is None:
            return None
        return (quantize(last[0]), quantize(last[1]))


def _require(data: dict, key: str, path: Path):
    if key not in data:
        raise ScenarioInvalid(f"{path}: missing required field {key!r}")
    return data[key]


def _parse_scene(data: dict, default_seed: int = 0) -> SceneSpec:
    floor_data = data.get("floor", {})
    floor = FloorTexture(
        kind=floor_data.get("kind", "noise"),
        base=float(floor_data.get("base", 120.0)),
        amplitude=float(floor_data.get("amplitude", 18.0)),
        texel=float(floor_data.get("texel", 0.04)),
        seed=int(floor_data.get("seed", default_seed)),
    )
    distractors = tuple(
        Distractor(
            kind=d["kind"],
            x0=float(d.get("x0", 0.0)), y0=float(d.get("y0", 0.0)),
            x1=float(d.get("x1", 0.0)), y1=float(d.get("y1", 0.0)),
            size=float(d.get("size", 0.01)),
            color=tuple(d.get("color", (140, 30, 30))),
        )
        for d in data.get("distractors", ())
    )
    walls = tuple(
        WallBox(x0=float(w["x0"]), y0=float(w["y0"]),
                x1=float(w["x1"]), y1=float(w["y1"]),
                height=float(w.get("height", 0.8)),
                gray=float(w.get("gray", 90.0)))
        for w in data.get("walls", ())
    )
    return SceneSpec(floor=floor, distractors=distractors, walls=walls)


def load_scenario(path: str | Path, seed: int | None = None,
                  dt: float | None = None) -> Scenario:
    """Load and validate a scenario file; optional seed/dt overrides."""
    path = Path(path)
    if not path.exists():
        raise ScenarioInvalid(f"scenario file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioInvalid(f"{path}: not valid JSON ({exc})") from exc

    base = path.parent
    prior = base / _require(data, "prior_map", path)
    if not prior.with_suffix(".pgm").exists():
        raise ScenarioInvalid(f"{path}: prior map not found: {prior}")
    gt_path = None
    if data.get("ground_truth_map"):
        gt_path = base / data["ground_truth_map"]
        if not gt_path.with_suffix(".pgm").exists():
            raise ScenarioInvalid(f"{path}: ground-truth map not found: {gt_path}")

    spawn_raw = _require(data, "spawn", path)
    spawn = RobotPose(float(spawn_raw[0]), float(spawn_raw[1]), float(spawn_raw[2]))

    intr_data = data.get("intrinsics", {})
    intrinsics = CameraIntrinsics(
        fx=float(intr_data.get("fx", 525.0)), fy=float(intr_data.get("fy", 525.0)),
        cx=float(intr_data.get("cx", 319.5)), cy=float(intr_data.get("cy", 239.5)),
        width=int(intr_data.get("width", 640)), height=int(intr_data.get("height", 480)),
    )
    mount_data = data.get("mounting", {})
    mount = CameraMount(height=float(mount_data.get("height", 0.35)),
                        pitch=float(mount_data.get("pitch", 0.45)),
                        forward=float(mount_data.get("forward", 0.0)))
    ctrl_data = data.get("controller", {})
    controller = ControllerParams(
        k_theta=float(ctrl_data.get("k_theta", 1.5)),
        k_v=float(ctrl_data.get("k_v", 0.8)),
        d_stop=float(ctrl_data.get("d_stop", 0.4)),
        d_cap=float(ctrl_data.get("d_cap", 2.0)),
    )
    limits = KinematicLimits(v_max=float(ctrl_data.get("v_max", 0.3)),
                             omega_max=float(ctrl_data.get("omega_max", 1.0)))
    det_data = data.get("detection", {})
    detection = DetectionParams(
        red_bands=tuple(tuple(b) for b in det_data.get("red_bands", ((0, 10), (170, 179)))),
        min_saturation=int(det_data.get("min_saturation", 80)),
        window=int(det_data.get("window", 31)),
        delta=float(det_data.get("delta", 40.0)),
        area_min=int(det_data.get("area_min", 3)),
        area_max=int(det_data.get("area_max", 200)),
        circularity_min=float(det_data.get("circularity_min", 0.6)),
        center_v_min=int(det_data.get("center_v_min", 200)),
    )

    script: list[LaserWaypoint] = []
    last_t = -math.inf
    for wp in data.get("laser_script", ()):
        t = float(wp["t"])
        if t < last_t:
            raise ScenarioInvalid(f"{path}: laser script times must be non-decreasing")
        last_t = t
        if wp.get("off"):
            script.append(LaserWaypoint(t, None))
        else:
            script.append(LaserWaypoint(t, (float(wp["x"]), float(wp["y"]))))

    events: list[TimedEvent] = []
    last_t = -math.inf
    for ev in data.get("events", ()):
        t = float(ev["t"])
        if t < last_t:
            raise ScenarioInvalid(f"{path}: event times must be non-decreasing")
        last_t = t
        name = ev["event"].lower()
        if name not in ("next", "previous"):
            raise ScenarioInvalid(f"{path}: unknown event {ev['event']!r}")
        events.append(TimedEvent(t, TransitionEvent(name)))

    run_seed = int(_require(data, "seed", path)) if seed is None else seed
    return Scenario(
        name=data.get("name", path.stem),
        seed=run_seed,
        dt=float(data.get("dt", 0.05)) if dt is None else dt,
        duration=float(_require(data, "duration", path)),
        perception_every=int(data.get("perception_every", 1)),
        pose_noise_sigma=float(data.get("pose_noise_sigma", 0.0)),
        prior_map_path=prior,
        ground_truth_path=gt_path,
        spawn=spawn,
        intrinsics=intrinsics,
        mount=mount,
        controller=controller,
        limits=limits,
        detection=detection,
        scene=_parse_scene(data.get("scene", {}), default_seed=run_seed),
        laser_script=script,
        events=events,
        expect=data.get("expect", {}),
        laser_radius=float(data.get("laser_radius", 0.0025)),
    )
