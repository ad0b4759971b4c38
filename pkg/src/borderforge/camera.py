"""Pinhole camera description and floor-plane geometry for the robot camera.

Camera frame follows the usual computer-vision convention: X right, Y down,
Z along the optical axis. The camera sits `height` meters above the floor,
yawed with the robot and pitched down by `pitch` so the ground is visible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float = 525.0
    fy: float = 525.0
    cx: float = 319.5
    cy: float = 239.5
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 < self.cx < self.width and 0 < self.cy < self.height):
            raise ValueError("principal point must lie inside the image")

    def scaled(self, factor: float) -> "CameraIntrinsics":
        """Intrinsics of the same camera at a resized image resolution."""
        return CameraIntrinsics(self.fx * factor, self.fy * factor,
                                (self.cx + 0.5) * factor - 0.5,
                                (self.cy + 0.5) * factor - 0.5,
                                round(self.width * factor), round(self.height * factor))


@dataclass(frozen=True)
class CameraMount:
    """Fixed mounting of the camera on the robot body."""

    height: float = 0.35   # meters above the floor
    pitch: float = 0.45    # rad downward, in (0, pi/2]
    forward: float = 0.0   # meters ahead of the robot center

    def __post_init__(self):
        if self.height <= 0:
            raise ValueError("camera height must be positive")
        if not (0 < self.pitch <= math.pi / 2):
            raise ValueError("pitch must be in (0, pi/2]")


@dataclass(frozen=True)
class CameraPose:
    """World placement of the camera for one frame: robot pose + mount."""

    x: float
    y: float
    yaw: float
    mount: CameraMount = CameraMount()

    @property
    def height(self) -> float:
        return self.mount.height

    @property
    def pitch(self) -> float:
        return self.mount.pitch


def ground_depth(intr: CameraIntrinsics, pose: CameraPose, pixel) -> float | None:
    """Depth along the optical axis where the pixel ray meets the floor.

    Returns None when the ray never reaches the floor (at or above the
    horizon). Depth is Z in the camera frame, not ray length.
    """
    u, v = pixel
    if not (0 <= u < intr.width and 0 <= v < intr.height):
        raise ValueError(f"pixel {pixel} outside {intr.width}x{intr.height} image")
    ry = (v - intr.cy) / intr.fy
    denom = ry * math.cos(pose.pitch) + math.sin(pose.pitch)
    if denom <= 1e-12:
        return None
    return pose.height / denom


@lru_cache(maxsize=8)
def floor_geometry(intr: CameraIntrinsics, mount: CameraMount):
    """Per-pixel floor intersection in the robot frame, cached per camera.

    The robot-local hit coordinates depend only on intrinsics and mounting
    (yawing the world about its vertical axis leaves them unchanged), so a
    frame render just rotates/translates these arrays into world space.

    Returns (depth Z, local_x forward, local_y left, valid) arrays of shape
    (height, width); invalid pixels (above the horizon) have depth 0.
    """
    us = np.arange(intr.width, dtype=np.float64)
    vs = np.arange(intr.height, dtype=np.float64)
    rx = (us[None, :] - intr.cx) / intr.fx          # camera X per column
    ry = (vs[:, None] - intr.cy) / intr.fy          # camera Y per row
    cp, sp = math.cos(mount.pitch), math.sin(mount.pitch)
    denom = ry * cp + sp                            # row-wise, shape (h, 1)
    valid_rows = denom > 1e-9
    depth_rows = np.where(valid_rows, mount.height / np.where(valid_rows, denom, 1.0), 0.0)
    # Camera-frame floor point is (rx*Z, ry*Z, Z); to robot-local axes:
    #   local_x = -Y*sin(pitch) + Z*cos(pitch) + forward,  local_y = -X.
    local_x = np.ascontiguousarray(np.broadcast_to(
        (-ry * sp + cp) * depth_rows + mount.forward,
        (intr.height, intr.width)).astype(np.float32))
    local_y = (-(rx * depth_rows)).astype(np.float32)
    depth = np.ascontiguousarray(np.broadcast_to(
        depth_rows, (intr.height, intr.width)).astype(np.float32))
    valid = np.ascontiguousarray(np.broadcast_to(
        valid_rows, (intr.height, intr.width)))
    for arr in (depth, local_x, local_y, valid):
        arr.flags.writeable = False
    return depth, local_x, local_y, valid
