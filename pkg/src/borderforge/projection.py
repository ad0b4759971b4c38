"""Pinhole projection: pixel+depth to 3D and back, camera frame to world.

The back-projection is the textbook inverse pinhole map
((x-cx)/fx * Z, (y-cy)/fy * Z, Z); no distortion model is applied because
the synthetic camera is distortion-free.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .camera import CameraIntrinsics, CameraPose
from .errors import BehindCamera, InvalidDepth
from .grid import WorldPoint

# Floor points recovered through the full pipeline may carry tiny vertical
# residual from pixel quantization; anything past this is a geometry bug.
FLOOR_TOLERANCE = 0.01


@dataclass(frozen=True)
class CameraPoint3D:
    x: float
    y: float
    z: float


def inverse_project(l, z: float, intr: CameraIntrinsics) -> CameraPoint3D:
    """Back-project pixel l at depth z (meters along the optical axis)."""
    if not (z > 0 and math.isfinite(z)):
        raise InvalidDepth(f"depth must be positive and finite, got {z}")
    u, v = l
    return CameraPoint3D((u - intr.cx) / intr.fx * z,
                         (v - intr.cy) / intr.fy * z,
                         z)


def forward_project(p: CameraPoint3D, intr: CameraIntrinsics) -> tuple[float, float]:
    """Project a camera-frame point to pixel coordinates."""
    if p.z <= 0:
        raise BehindCamera(f"point at Z={p.z} is behind the camera")
    return (intr.fx * p.x / p.z + intr.cx,
            intr.fy * p.y / p.z + intr.cy)


def camera_to_world(p: CameraPoint3D, pose: CameraPose,
                    strict: bool = False) -> WorldPoint:
    """Map a camera-frame floor point to world (x, y) on the ground plane.

    Applies the pitch rotation and mount height, then the robot yaw and
    position. The vertical component must come out near zero for genuine
    floor points; with strict=True a larger residual raises instead of
    being clamped.
    """
    cp, sp = math.cos(pose.pitch), math.sin(pose.pitch)
    local_x = -p.y * sp + p.z * cp + pose.mount.forward
    local_y = -p.x
    local_z = pose.height - p.y * cp - p.z * sp
    if strict and abs(local_z) > FLOOR_TOLERANCE:
        raise ValueError(f"camera point {p} is {local_z:.4f} m off the floor plane")
    cy, sy = math.cos(pose.yaw), math.sin(pose.yaw)
    return (pose.x + cy * local_x - sy * local_y,
            pose.y + sy * local_x + cy * local_y)
