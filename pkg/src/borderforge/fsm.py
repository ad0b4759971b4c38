"""Three-state teaching interaction: Start, Record, Keep Off.

Next advances Start -> Record -> KeepOff -> (finalize, back to Start);
Previous retreats and discards whatever the abandoned state produced.
Every state change emits exactly one feedback event (LED color plus a
beep), mirroring the robot's on-board signaling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .border import BorderKind, integrate_border_details
from .camera import CameraMount
from .errors import (BorderforgeError, FinalizeFailed, InsufficientHistory,
                     NoKeepOffPoint)
from .evaluate import border_length
from .grid import OccupancyGrid, WorldPoint
from .projection import CameraPoint3D
from .robot import (ControllerParams, KinematicLimits, PoseHistory, RobotPose,
                    VelocityCommand, follow_command, rotate_command)

SPOT_LOST_HOLD = 0.5  # s to keep the last follow command after losing the spot


class TeachingState(Enum):
    START = "start"
    RECORD = "record"
    KEEP_OFF = "keep_off"


class TransitionEvent(Enum):
    NEXT = "next"
    PREVIOUS = "previous"


LED_COLORS = {
    TeachingState.START: "green",
    TeachingState.RECORD: "red",
    TeachingState.KEEP_OFF: "blue",
}


@dataclass(frozen=True)
class FeedbackEvent:
    time: float
    state: TeachingState
    led: str
    beep: bool = True


@dataclass(frozen=True)
class BorderRecord:
    kind: BorderKind
    length: float
    teaching_time: float
    cells_connected: int = 0
    cells_border: int = 0


@dataclass
class TeachingSession:
    prior_map: OccupancyGrid
    state: TeachingState = TeachingState.START
    recorded: PoseHistory = field(default_factory=PoseHistory)
    last_laser_world: WorldPoint | None = None
    last_laser_time: float | None = None
    record_start: float | None = None
    record_end: float | None = None
    feedback_log: list[FeedbackEvent] = field(default_factory=list)
    borders: list[BorderRecord] = field(default_factory=list)
    rotate_target: float | None = None
    closure_threshold: float = 0.30
    _last_cmd: VelocityCommand | None = None
    _last_cmd_time: float | None = None

    @property
    def led(self) -> str:
        return LED_COLORS[self.state]


def _enter(session: TeachingSession, state: TeachingState, now: float) -> None:
    session.state = state
    session.feedback_log.append(FeedbackEvent(now, state, LED_COLORS[state]))


def finalize_session(session: TeachingSession, prior: OccupancyGrid) -> OccupancyGrid:
    """Integrate the recorded border into the prior map.

    Requires a Keep Off session with at least two recorded poses and an
    observed laser position; returns the posterior map and logs the
    border's kind, length and teaching time.
    """
    if session.state is not TeachingState.KEEP_OFF:
        raise FinalizeFailed("finalize is only valid in the Keep Off state")
    if len(session.recorded) < 2:
        raise InsufficientHistory(
            f"need at least 2 recorded poses, got {len(session.recorded)}")
    if session.last_laser_world is None:
        raise NoKeepOffPoint("no laser position was ever observed")
    result = integrate_border_details(prior, session.recorded,
                                      session.last_laser_world,
                                      session.closure_threshold)
    teaching_time = (session.record_end or 0.0) - (session.record_start or 0.0)
    session.borders.append(BorderRecord(
        kind=result.kind,
        length=border_length(result.chain, closed=result.kind is BorderKind.CLOSED),
        teaching_time=teaching_time,
        cells_connected=len(result.partition.connected),
        cells_border=len(result.partition.border_cells),
    ))
    return result.posterior


def handle_event(session: TeachingSession, event: TransitionEvent,
                 now: float) -> TeachingState:
    """Apply a next/previous event; returns the state after the event.

    A finalizing Next that fails raises FinalizeFailed and leaves the
    session in Keep Off so the user may retry.
    """
    state = session.state
    if event is TransitionEvent.NEXT:
        if state is TeachingState.START:
            session.record_start = now
            session.record_end = None
            _enter(session, TeachingState.RECORD, now)
        elif state is TeachingState.RECORD:
            session.record_end = now
            _enter(session, TeachingState.KEEP_OFF, now)
        else:  # KEEP_OFF: integrate, then wrap around for the next border
            try:
                posterior = finalize_session(session, session.prior_map)
            except BorderforgeError as exc:
                raise FinalizeFailed(str(exc)) from exc
            session.prior_map = posterior
            session.recorded = PoseHistory()
            session.record_start = None
            session.record_end = None
            session.rotate_target = None
            _enter(session, TeachingState.START, now)
    else:  # PREVIOUS
        if state is TeachingState.RECORD:
            session.recorded = PoseHistory()
            session.record_start = None
            _enter(session, TeachingState.START, now)
        elif state is TeachingState.KEEP_OFF:
            session.record_end = None
            session.rotate_target = None
            _enter(session, TeachingState.RECORD, now)
        # PREVIOUS in START is a no-op with no feedback
    return session.state


def tick(session: TeachingSession, pose: RobotPose,
         laser_cam: CameraPoint3D | None, laser_world: WorldPoint | None,
         now: float, ctrl: ControllerParams = ControllerParams(),
         mount: CameraMount = CameraMount(),
         limits: KinematicLimits = KinematicLimits()) -> VelocityCommand:
    """One simulation step of the interaction: update the last laser
    position, record poses while in Record, and produce the velocity
    command for the current state."""
    if laser_world is not None:
        session.last_laser_world = laser_world
        session.last_laser_time = now

    if session.state is TeachingState.RECORD:
        spacing = session.prior_map.resolution
        samples = session.recorded.samples
        if not samples or math.dist((samples[-1][1].x, samples[-1][1].y),
                                    (pose.x, pose.y)) >= spacing:
            session.recorded.append(now, pose)

    if session.state in (TeachingState.START, TeachingState.RECORD):
        if laser_cam is not None:
            cmd = follow_command(laser_cam, ctrl, mount, limits)
            session._last_cmd = cmd
            session._last_cmd_time = now
            return cmd
        if (session._last_cmd is not None and session._last_cmd_time is not None
                and now - session._last_cmd_time <= SPOT_LOST_HOLD):
            return session._last_cmd
        return VelocityCommand(0.0, 0.0)

    # Keep Off: the robot stops following; it only rotates on user command.
    if session.rotate_target is not None:
        return rotate_command(session.rotate_target, pose, ctrl.k_theta, limits)
    return VelocityCommand(0.0, 0.0)
