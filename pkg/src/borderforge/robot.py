"""Differential-drive kinematics and the laser-following controllers.

step() integrates the unicycle model exactly (arc update, straight-line
fallback for tiny angular rates). follow_command() is a proportional
visual-servoing law on the floor-projected spot position: turn toward the
spot, drive at a speed proportional to the remaining distance, stop short
of it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .camera import CameraMount
from .grid import FREE, OccupancyGrid
from .projection import CameraPoint3D


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


@dataclass(frozen=True)
class RobotPose:
    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass
class PoseHistory:
    samples: list[tuple[float, RobotPose]] = field(default_factory=list)

    def append(self, t: float, pose: RobotPose) -> None:
        if self.samples and t <= self.samples[-1][0]:
            raise ValueError("timestamps must be strictly increasing")
        self.samples.append((t, pose))

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def poses(self) -> list[RobotPose]:
        return [pose for _, pose in self.samples]


@dataclass(frozen=True)
class VelocityCommand:
    v: float = 0.0       # m/s forward
    omega: float = 0.0   # rad/s yaw, CCW positive


@dataclass(frozen=True)
class KinematicLimits:
    v_max: float = 0.3
    omega_max: float = 1.0


@dataclass(frozen=True)
class ControllerParams:
    k_theta: float = 1.5   # rad/s per rad of bearing error
    k_v: float = 0.8       # 1/s speed gain on remaining distance
    d_stop: float = 0.4    # m, stop short of the spot
    d_cap: float = 2.0     # m, distance at which speed saturates

    def __post_init__(self):
        if min(self.k_theta, self.k_v, self.d_stop, self.d_cap) <= 0:
            raise ValueError("controller parameters must be positive")
        if self.d_stop >= self.d_cap:
            raise ValueError("d_stop must be below d_cap")


def step(pose: RobotPose, cmd: VelocityCommand, dt: float,
         physical_map: OccupancyGrid | None = None) -> RobotPose:
    """Exact unicycle integration over dt.

    With a physical map given, a step whose endpoint cell is not Free is
    rejected and the robot halts in place.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    if abs(cmd.omega) < 1e-9:
        new = RobotPose(pose.x + cmd.v * math.cos(pose.theta) * dt,
                        pose.y + cmd.v * math.sin(pose.theta) * dt,
                        pose.theta)
    else:
        radius = cmd.v / cmd.omega
        theta1 = pose.theta + cmd.omega * dt
        new = RobotPose(pose.x + radius * (math.sin(theta1) - math.sin(pose.theta)),
                        pose.y - radius * (math.cos(theta1) - math.cos(pose.theta)),
                        theta1)
    if physical_map is not None:
        from .grid import world_to_cell
        from .errors import OutOfBounds
        try:
            cell = world_to_cell(physical_map, (new.x, new.y))
        except OutOfBounds:
            return RobotPose(pose.x, pose.y, new.theta)
        if physical_map.at(cell) != FREE:
            return RobotPose(pose.x, pose.y, new.theta)
    return new


def _clamp(value: float, bound: float) -> float:
    return max(-bound, min(bound, value))


def floor_offset(point: CameraPoint3D, mount: CameraMount) -> tuple[float, float]:
    """Robot-frame floor coordinates (forward, left) of a camera-frame point."""
    cp, sp = math.cos(mount.pitch), math.sin(mount.pitch)
    forward = -point.y * sp + point.z * cp + mount.forward
    left = -point.x
    return forward, left


def follow_command(point: CameraPoint3D, params: ControllerParams = ControllerParams(),
                   mount: CameraMount = CameraMount(),
                   limits: KinematicLimits = KinematicLimits()) -> VelocityCommand:
    """Chase the spot: P-control on bearing, speed from planar distance.

    Speed is zero inside d_stop and scaled by max(0, cos(bearing)) so the
    robot turns in place before driving toward a spot far off-axis.
    """
    if point.z <= 0:
        raise ValueError("spot must be in front of the camera")
    forward, left = floor_offset(point, mount)
    bearing = math.atan2(left, forward)
    omega = _clamp(params.k_theta * bearing, limits.omega_max)
    distance = math.hypot(forward, left)
    if distance < params.d_stop:
        v = 0.0
    else:
        v = params.k_v * (min(distance, params.d_cap) - params.d_stop)
        v = min(v, limits.v_max) * max(0.0, math.cos(bearing))
    return VelocityCommand(v=v, omega=omega)


def rotate_command(target_yaw: float, pose: RobotPose, k_theta: float = 1.5,
                   limits: KinematicLimits = KinematicLimits()) -> VelocityCommand:
    """Rotate in place toward target_yaw; dead band of 0.02 rad."""
    error = wrap_angle(target_yaw - pose.theta)
    if abs(error) < 0.02:
        return VelocityCommand(0.0, 0.0)
    return VelocityCommand(0.0, _clamp(k_theta * error, limits.omega_max))
