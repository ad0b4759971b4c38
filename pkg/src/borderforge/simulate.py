"""Closed-loop teaching simulation: render -> detect -> project -> drive.

One Simulation owns a map, a robot, and a teaching session. Scripted runs
take the laser position and next/previous events from the scenario file;
interactive runs (the session service) inject them through set_laser() and
inject_event(), drained once per tick. Everything is deterministic given
the scenario and seed.
"""
from __future__ import annotations

import json
from collections import deque
from pathlib import Path

import numpy as np

from .camera import CameraPose
from .detect import detect_laser_point
from .errors import FinalizeFailed
from .evaluate import ScenarioReport, BorderReport, jaccard, virtual_area_cells
from .fsm import TeachingSession, TransitionEvent, handle_event, tick as fsm_tick
from .grid import OccupancyGrid, WorldPoint, load_map, save_map
from .projection import camera_to_world, inverse_project
from .robot import RobotPose, VelocityCommand, step
from .scenario import Scenario, quantize
from .scene import LaserSpot, render_frame


class Simulation:
    def __init__(self, scenario: Scenario, interactive: bool = False):
        self.scenario = scenario
        self.physical_map: OccupancyGrid = load_map(scenario.prior_map_path)
        self.ground_truth: OccupancyGrid | None = (
            load_map(scenario.ground_truth_path) if scenario.ground_truth_path else None)
        self.interactive = interactive
        self.session = TeachingSession(prior_map=self.physical_map)
        self.pose: RobotPose = scenario.spawn
        self.t = 0.0
        self.tick_index = 0
        self.log: list[dict] = []
        self.failures: list[str] = []
        self.external_laser: WorldPoint | None = None
        self._injected: deque = deque()
        # interactive sessions take laser and events from the client only
        self._script_events = [] if interactive else list(scenario.events)
        self._last_cmd = VelocityCommand()
        self._feedback_seen = 0
        self._noise_rng = np.random.default_rng(scenario.seed)

    # -- interactive controls (service) ------------------------------------

    def set_laser(self, point: WorldPoint | None) -> None:
        self.external_laser = None if point is None else (
            quantize(point[0]), quantize(point[1]))

    def inject_event(self, event: TransitionEvent) -> None:
        self._injected.append(event)

    def set_rotate_target(self, yaw: float | None) -> None:
        self.session.rotate_target = yaw

    def reset(self) -> None:
        self.session = TeachingSession(prior_map=self.physical_map)
        self.pose = self.scenario.spawn
        self.t = 0.0
        self.tick_index = 0
        self.log.clear()
        self.failures.clear()
        self.external_laser = None
        self._injected.clear()
        self._script_events = [] if self.interactive else list(self.scenario.events)
        self._last_cmd = VelocityCommand()
        self._feedback_seen = 0
        self._noise_rng = np.random.default_rng(self.scenario.seed)

    # -- stepping -----------------------------------------------------------

    def _apply_event(self, event: TransitionEvent) -> None:
        finalized_before = len(self.session.borders)
        try:
            handle_event(self.session, event, self.t)
        except FinalizeFailed as exc:
            self.failures.append(str(exc))
            self.log.append({"t": round(self.t, 6), "event": "finalize_failed",
                             "error": str(exc)})
            return
        if len(self.session.borders) > finalized_before:
            record = self.session.borders[-1]
            self.log.append({
                "t": round(self.t, 6), "event": "border_integrated",
                "kind": record.kind.value, "length": record.length,
                "teaching_time": record.teaching_time,
                "cells_connected": record.cells_connected,
                "cells_border": record.cells_border,
            })

    def tick(self) -> None:
        while self._script_events and self._script_events[0].t <= self.t + 1e-9:
            self._apply_event(self._script_events.pop(0).event)
        while self._injected:
            self._apply_event(self._injected.popleft())

        if self.interactive:
            laser_true = self.external_laser
        else:
            laser_true = self.scenario.laser_at(self.t)

        # the belief pose carries optional localization noise; the camera
        # physically sits at the true pose, but projections and the recorded
        # trajectory use what the robot believes
        belief = self.pose
        if self.scenario.pose_noise_sigma > 0:
            nx, ny = self._noise_rng.normal(0.0, self.scenario.pose_noise_sigma, 2)
            belief = RobotPose(self.pose.x + float(nx), self.pose.y + float(ny),
                               self.pose.theta)

        laser_cam = None
        laser_measured = None
        if self.tick_index % self.scenario.perception_every == 0:
            spot = None
            if laser_true is not None:
                spot = LaserSpot(laser_true[0], laser_true[1],
                                 radius=self.scenario.laser_radius)
            true_cam = CameraPose(self.pose.x, self.pose.y, self.pose.theta,
                                  self.scenario.mount)
            frame = render_frame(self.scenario.scene.with_laser(spot),
                                 self.scenario.intrinsics, true_cam)
            pixel = detect_laser_point(frame, self.scenario.detection)
            if pixel is not None:
                z = frame.depth_at(pixel)
                if z > 0:
                    believed_cam = CameraPose(belief.x, belief.y, belief.theta,
                                              self.scenario.mount)
                    laser_cam = inverse_project(pixel, z, self.scenario.intrinsics)
                    laser_measured = camera_to_world(laser_cam, believed_cam)

        cmd = fsm_tick(self.session, belief, laser_cam, laser_measured, self.t,
                       self.scenario.controller, self.scenario.mount,
                       self.scenario.limits)
        self._last_cmd = cmd
        self.pose = step(self.pose, cmd, self.scenario.dt, self.physical_map)

        new_feedback = self.session.feedback_log[self._feedback_seen:]
        self._feedback_seen = len(self.session.feedback_log)
        entry = {
            "t": round(self.t, 6),
            "state": self.session.state.value,
            "pose": [belief.x, belief.y, belief.theta],
            "laser": list(laser_measured) if laser_measured else None,
            "led": self.session.led,
            "cmd": [cmd.v, cmd.omega],
        }
        if new_feedback:
            entry["feedback"] = [
                {"state": f.state.value, "led": f.led, "beep": f.beep}
                for f in new_feedback
            ]
        self.log.append(entry)

        self.t += self.scenario.dt
        self.tick_index += 1

    def run(self, duration: float | None = None) -> None:
        end = self.scenario.duration if duration is None else duration
        while self.t < end - 1e-9:
            self.tick()

    # -- reporting ----------------------------------------------------------

    def build_report(self) -> ScenarioReport:
        report = ScenarioReport(scenario=self.scenario.name, seed=self.scenario.seed)
        report.errors = list(self.failures)
        report.borders = [
            BorderReport(kind=b.kind.value, length=b.length,
                         teaching_time=b.teaching_time)
            for b in self.session.borders
        ]
        report.teaching_time = sum(b.teaching_time for b in self.session.borders)
        report.border_length = sum(b.length for b in self.session.borders)
        if self.ground_truth is not None and self.session.borders:
            gt_cells = virtual_area_cells(self.physical_map, self.ground_truth)
            ud_cells = virtual_area_cells(self.physical_map, self.session.prior_map)
            if gt_cells or ud_cells:
                report.jaccard = jaccard(gt_cells, ud_cells)
        expect = self.scenario.expect
        if "min_jaccard" in expect:
            report.criteria["jaccard"] = (report.jaccard is not None
                                          and report.jaccard >= expect["min_jaccard"])
        if "borders" in expect:
            report.criteria["borders"] = len(report.borders) == expect["borders"]
        return report

    def write_outputs(self, out_dir: str | Path, report: ScenarioReport) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_map(self.session.prior_map, out / "posterior")
        (out / "report.json").write_text(
            json.dumps(report.to_dict(), sort_keys=True, indent=2) + "\n")
        with (out / "session.jsonl").open("w") as fh:
            for entry in self.log:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
