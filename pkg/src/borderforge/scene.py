"""Synthetic RGB-D rendering of a flat-floor scene from the robot camera.

A frame is a pure function of (scene, intrinsics, camera pose): per-pixel
floor intersection gives depth and texture color, the laser spot is an
additive radially decaying bright red disk, and distractors are painted
per their type. Floor texture noise is hash-based, so identical inputs
produce byte-identical frames.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, CameraPose, floor_geometry
from .grid import WorldPoint

# Pixels with no surface hit ("sky") render dark with zero depth.
_SKY_GRAY = 40.0

# Image-space floor on the rendered spot sigma: real cameras bloom around a
# saturated laser core, so a distant spot never collapses below ~a pixel.
BLOOM_SIGMA_PX = 1.3


@dataclass(frozen=True)
class FloorTexture:
    """Hash-noise or checkerboard floor coloring, gray by default.

    Floors should stay below ~150 brightness so the red laser core keeps
    enough saturation to pass the detector's color gate.
    """

    kind: str = "noise"          # "noise" | "checker"
    base: float = 120.0          # gray level
    amplitude: float = 18.0      # noise: +- gray jitter; checker: half contrast
    texel: float = 0.04          # meters per texture cell
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("noise", "checker"):
            raise ValueError(f"unknown floor texture kind {self.kind!r}")
        if self.texel <= 0:
            raise ValueError("texel size must be positive")


@dataclass(frozen=True)
class LaserSpot:
    """Red laser dot on the floor; radius is the physical spot radius."""

    x: float
    y: float
    radius: float = 0.0025
    peak: tuple[int, int, int] = (255, 20, 20)

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("laser radius must be positive")


@dataclass(frozen=True)
class Distractor:
    """Floor features designed to defeat exactly one detection stage.

    kinds:
      matte_rect   -- dull red paint, fails the local-brightness gate
      specular_dot -- bright white glare, fails the red-color gate
      big_blob     -- bright red and huge, fails the blob-size gate
      strip        -- bright red thin streak, fails the circularity gate
    """

    kind: str
    x0: float
    y0: float
    x1: float = 0.0
    y1: float = 0.0
    size: float = 0.01
    color: tuple[int, int, int] = (140, 30, 30)

    def __post_init__(self):
        if self.kind not in ("matte_rect", "specular_dot", "big_blob", "strip"):
            raise ValueError(f"unknown distractor kind {self.kind!r}")


@dataclass(frozen=True)
class WallBox:
    """Axis-aligned vertical box; occludes the floor and bounds depth."""

    x0: float
    y0: float
    x1: float
    y1: float
    height: float = 0.8
    gray: float = 90.0


@dataclass(frozen=True)
class SceneSpec:
    floor: FloorTexture = FloorTexture()
    laser: LaserSpot | None = None
    distractors: tuple[Distractor, ...] = ()
    walls: tuple[WallBox, ...] = ()

    def with_laser(self, laser: LaserSpot | None) -> "SceneSpec":
        return SceneSpec(self.floor, laser, self.distractors, self.walls)


@dataclass(frozen=True)
class RenderedFrame:
    color: np.ndarray   # (h, w, 3) uint8 RGB
    hsv: np.ndarray     # (h, w, 3) uint8, H in [0,180), S and V in [0,255]
    depth: np.ndarray   # (h, w) float32 meters along the optical axis, 0 = no return

    @property
    def width(self) -> int:
        return self.color.shape[1]

    @property
    def height(self) -> int:
        return self.color.shape[0]

    def depth_at(self, pixel) -> float:
        """Bilinear depth at a fractional pixel; falls back to the nearest
        sample when a neighbor has no return."""
        u = min(max(float(pixel[0]), 0.0), self.width - 1.0)
        v = min(max(float(pixel[1]), 0.0), self.height - 1.0)
        x0, y0 = int(u), int(v)
        x1, y1 = min(x0 + 1, self.width - 1), min(y0 + 1, self.height - 1)
        corners = self.depth[[y0, y0, y1, y1], [x0, x1, x0, x1]].astype(np.float64)
        if (corners == 0.0).any():
            return float(self.depth[int(round(v)), int(round(u))])
        fx, fy = u - x0, v - y0
        top = corners[0] * (1 - fx) + corners[1] * fx
        bottom = corners[2] * (1 - fx) + corners[3] * fx
        return float(top * (1 - fy) + bottom * fy)


def _hash_noise(ix: np.ndarray, iy: np.ndarray, seed: int) -> np.ndarray:
    """SplitMix-style integer hash of texel coordinates, uniform in [0, 1)."""
    seed_term = np.uint64((seed * 0x165667B19E3779F9) & 0xFFFFFFFFFFFFFFFF)
    h = (ix.astype(np.int64).view(np.uint64) * np.uint64(0x9E3779B97F4A7C15)
         + iy.astype(np.int64).view(np.uint64) * np.uint64(0xC2B2AE3D27D4EB4F)
         + seed_term)
    h ^= h >> np.uint64(30)
    h *= np.uint64(0xBF58476D1CE4E5B9)
    h ^= h >> np.uint64(27)
    h *= np.uint64(0x94D049BB133111EB)
    h ^= h >> np.uint64(31)
    return ((h >> np.uint64(11)).astype(np.float64) * (2.0 ** -53)).astype(np.float32)


def _hsv_from_planes(r8: np.ndarray, g8: np.ndarray, b8: np.ndarray) -> np.ndarray:
    """HSV (H in [0,180), OpenCV-style) from contiguous uint8 channel planes.

    Hue is only evaluated where the pixel is chromatic (max != min); gray
    pixels, the bulk of a floor frame, get H = S = 0 directly.
    """
    maxc = np.maximum(np.maximum(r8, g8), b8)
    minc = np.minimum(np.minimum(r8, g8), b8)
    delta16 = maxc.astype(np.int16) - minc
    out = np.zeros(r8.shape + (3,), dtype=np.uint8)
    out[..., 2] = maxc

    lit = maxc > 0
    s = np.zeros(maxc.shape, dtype=np.float32)
    np.divide(delta16, maxc, where=lit, out=s, casting="unsafe")
    out[..., 1] = np.rint(255.0 * s).astype(np.uint8)

    ys, xs = np.nonzero(delta16)
    if len(ys):
        r = r8[ys, xs].astype(np.float64)
        g = g8[ys, xs].astype(np.float64)
        b = b8[ys, xs].astype(np.float64)
        mx = maxc[ys, xs].astype(np.float64)
        dl = delta16[ys, xs].astype(np.float64)
        hue = np.where(mx == r, 60.0 * (g - b) / dl,
                       np.where(mx == g, 120.0 + 60.0 * (b - r) / dl,
                                240.0 + 60.0 * (r - g) / dl))
        hue = np.where(hue < 0, hue + 360.0, hue)
        out[ys, xs, 0] = (np.rint(hue / 2.0).astype(np.int64) % 180).astype(np.uint8)
    return out


def rgb_to_hsv_u8(color: np.ndarray) -> np.ndarray:
    """uint8 RGB image -> uint8 HSV with H in [0,180), S and V in [0,255]."""
    return _hsv_from_planes(np.ascontiguousarray(color[..., 0]),
                            np.ascontiguousarray(color[..., 1]),
                            np.ascontiguousarray(color[..., 2]))


def _segment_distance_sq(px, py, x0, y0, x1, y1):
    dx, dy = x1 - x0, y1 - y0
    seg_len_sq = dx * dx + dy * dy
    if seg_len_sq < 1e-18:
        return (px - x0) ** 2 + (py - y0) ** 2
    t = np.clip(((px - x0) * dx + (py - y0) * dy) / seg_len_sq, 0.0, 1.0)
    return (px - x0 - t * dx) ** 2 + (py - y0 - t * dy) ** 2


def spot_sigma_px(spot: LaserSpot, depth_at_spot: float, fx: float) -> float:
    """Rendered spot sigma in pixels: the projected physical radius/2 with
    the sensor-bloom floor applied, isotropic in image space."""
    return max(fx * (spot.radius / 2.0) / depth_at_spot, BLOOM_SIGMA_PX)


def _spot_depth(spot_x: float, spot_y: float, pose: CameraPose) -> float:
    """Camera-frame depth of a floor point (negative if behind the camera)."""
    cy, sy = math.cos(pose.yaw), math.sin(pose.yaw)
    dx, dy = spot_x - pose.x, spot_y - pose.y
    local_x = cy * dx + sy * dy - pose.mount.forward
    cp, sp = math.cos(pose.pitch), math.sin(pose.pitch)
    return local_x * cp + pose.height * sp


def render_frame(scene: SceneSpec, intr: CameraIntrinsics, pose: CameraPose) -> RenderedFrame:
    depth_local, local_x, local_y, valid = floor_geometry(intr, pose.mount)
    cy = np.float32(math.cos(pose.yaw))
    sy = np.float32(math.sin(pose.yaw))
    wx = np.float32(pose.x) + cy * local_x - sy * local_y
    wy = np.float32(pose.y) + sy * local_x + cy * local_y

    tex = scene.floor
    inv_texel = np.float32(1.0 / tex.texel)
    ix = np.floor(wx * inv_texel)
    iy = np.floor(wy * inv_texel)
    if tex.kind == "noise":
        jitter = 2.0 * _hash_noise(ix, iy, tex.seed) - 1.0
    else:
        jitter = 2.0 * ((ix + iy) % 2.0) - 1.0
    gray = (tex.base + tex.amplitude * jitter).astype(np.float32)
    r = np.where(valid, gray, np.float32(_SKY_GRAY))
    g = r.copy()
    b = r.copy()

    def _add_radial(cx_w, cy_w, sigma, color, gain=1.0):
        """Accumulate a Gaussian splat; evaluated only inside its 5-sigma box."""
        reach = np.float32(5.0 * sigma)
        box = (valid & (np.abs(wx - np.float32(cx_w)) < reach)
               & (np.abs(wy - np.float32(cy_w)) < reach))
        ys, xs = np.nonzero(box)
        if not len(ys):
            return
        dx = wx[ys, xs] - np.float32(cx_w)
        dy = wy[ys, xs] - np.float32(cy_w)
        i = np.exp(-(dx * dx + dy * dy) / np.float32(2.0 * sigma * sigma))
        r[ys, xs] += np.float32(gain * color[0]) * i
        g[ys, xs] += np.float32(gain * color[1]) * i
        b[ys, xs] += np.float32(gain * color[2]) * i

    for d in scene.distractors:
        if d.kind == "matte_rect":
            inside = (valid & (wx >= d.x0) & (wx <= d.x1)
                      & (wy >= d.y0) & (wy <= d.y1))
            r[inside] = np.float32(d.color[0])
            g[inside] = np.float32(d.color[1])
            b[inside] = np.float32(d.color[2])
        elif d.kind == "specular_dot":
            _add_radial(d.x0, d.y0, d.size / 2.0, (220.0, 220.0, 220.0))
        elif d.kind == "big_blob":
            # flat-top profile: a steep rim keeps the locally-bright band an
            # unbroken ring, so the size/circularity gates see one big blob
            # instead of noise-pinched fragments
            sigma = d.size / 2.0
            reach = np.float32(3.0 * sigma)
            box = (valid & (np.abs(wx - np.float32(d.x0)) < reach)
                   & (np.abs(wy - np.float32(d.y0)) < reach))
            ys, xs = np.nonzero(box)
            if len(ys):
                dx = wx[ys, xs] - np.float32(d.x0)
                dy = wy[ys, xs] - np.float32(d.y0)
                ratio = (dx * dx + dy * dy) / np.float32(2.0 * sigma * sigma)
                i = np.exp(-(ratio * ratio * ratio))
                r[ys, xs] += np.float32(d.color[0]) * i
                g[ys, xs] += np.float32(d.color[1]) * i
                b[ys, xs] += np.float32(d.color[2]) * i
        elif d.kind == "strip":
            sigma = d.size / 2.0
            pad = np.float32(5.0 * sigma)
            box = (valid
                   & (wx >= min(d.x0, d.x1) - pad) & (wx <= max(d.x0, d.x1) + pad)
                   & (wy >= min(d.y0, d.y1) - pad) & (wy <= max(d.y0, d.y1) + pad))
            ys, xs = np.nonzero(box)
            if len(ys):
                d_sq = _segment_distance_sq(wx[ys, xs].astype(np.float64),
                                            wy[ys, xs].astype(np.float64),
                                            d.x0, d.y0, d.x1, d.y1)
                i = np.exp(-d_sq / (2.0 * sigma * sigma)).astype(np.float32)
                r[ys, xs] += np.float32(d.color[0]) * i
                g[ys, xs] += np.float32(d.color[1]) * i
                b[ys, xs] += np.float32(d.color[2]) * i

    if scene.laser is not None:
        # The spot is splatted in image space: a saturated laser core blooms
        # isotropically on the sensor, so foreshortening never thins it.
        center = project_floor_point((scene.laser.x, scene.laser.y), intr, pose,
                                     clip_to_image=False)
        if center is not None:
            z_spot = _spot_depth(scene.laser.x, scene.laser.y, pose)
            sigma = spot_sigma_px(scene.laser, z_spot, intr.fx)
            u, v = center
            reach = 5.0 * sigma
            x_lo = max(0, int(math.floor(u - reach)))
            x_hi = min(intr.width, int(math.ceil(u + reach)) + 1)
            y_lo = max(0, int(math.floor(v - reach)))
            y_hi = min(intr.height, int(math.ceil(v + reach)) + 1)
            if x_lo < x_hi and y_lo < y_hi:
                du = (np.arange(x_lo, x_hi, dtype=np.float32) - np.float32(u))[None, :]
                dv = (np.arange(y_lo, y_hi, dtype=np.float32) - np.float32(v))[:, None]
                i = np.exp(-(du * du + dv * dv) / np.float32(2.0 * sigma * sigma))
                i = np.where(valid[y_lo:y_hi, x_lo:x_hi], i, np.float32(0.0))
                r[y_lo:y_hi, x_lo:x_hi] += np.float32(scene.laser.peak[0]) * i
                g[y_lo:y_hi, x_lo:x_hi] += np.float32(scene.laser.peak[1]) * i
                b[y_lo:y_hi, x_lo:x_hi] += np.float32(scene.laser.peak[2]) * i

    depth = np.where(valid, depth_local, np.float32(0.0))

    if scene.walls:
        cam = np.array([pose.x + cy * pose.mount.forward,
                        pose.y + sy * pose.mount.forward,
                        pose.height])
        # Ray to each pixel's floor hit, parameterized s in [0, 1].
        dx3 = wx - cam[0]
        dy3 = wy - cam[1]
        dz3 = np.where(valid, -cam[2], -0.01)
        for wall in scene.walls:
            with np.errstate(divide="ignore", invalid="ignore"):
                tx0 = (wall.x0 - cam[0]) / dx3
                tx1 = (wall.x1 - cam[0]) / dx3
                ty0 = (wall.y0 - cam[1]) / dy3
                ty1 = (wall.y1 - cam[1]) / dy3
                tz0 = (0.0 - cam[2]) / dz3
                tz1 = (wall.height - cam[2]) / dz3
            enter = np.maximum.reduce([np.minimum(tx0, tx1),
                                       np.minimum(ty0, ty1),
                                       np.minimum(tz0, tz1)])
            exit_ = np.minimum.reduce([np.maximum(tx0, tx1),
                                       np.maximum(ty0, ty1),
                                       np.maximum(tz0, tz1)])
            hit = valid & (enter <= exit_) & (enter > 1e-9) & (enter < 1.0)
            r = np.where(hit, np.float32(wall.gray), r)
            g = np.where(hit, np.float32(wall.gray), g)
            b = np.where(hit, np.float32(wall.gray), b)
            depth = np.where(hit, (enter * depth).astype(np.float32), depth)

    # adding 0.5 then truncating = round-half-up, cheaper than rint
    r8 = np.clip(r + np.float32(0.5), 0, 255).astype(np.uint8)
    g8 = np.clip(g + np.float32(0.5), 0, 255).astype(np.uint8)
    b8 = np.clip(b + np.float32(0.5), 0, 255).astype(np.uint8)
    color = np.empty((intr.height, intr.width, 3), dtype=np.uint8)
    color[..., 0] = r8
    color[..., 1] = g8
    color[..., 2] = b8
    return RenderedFrame(color=color, hsv=_hsv_from_planes(r8, g8, b8),
                         depth=depth.astype(np.float32))


def project_floor_point(p: WorldPoint, intr: CameraIntrinsics, pose: CameraPose,
                        clip_to_image: bool = True) -> tuple[float, float] | None:
    """Ground-truth pixel of a world floor point.

    Returns None behind the camera, and (with clip_to_image) also when the
    pixel falls outside the image bounds.
    """
    cy, sy = math.cos(pose.yaw), math.sin(pose.yaw)
    dx, dy = p[0] - pose.x, p[1] - pose.y
    local_x = cy * dx + sy * dy - pose.mount.forward
    local_y = -sy * dx + cy * dy
    cp, sp = math.cos(pose.pitch), math.sin(pose.pitch)
    z = local_x * cp + pose.height * sp
    if z <= 1e-9:
        return None
    x_cam = -local_y
    y_cam = -local_x * sp + pose.height * cp
    u = intr.fx * x_cam / z + intr.cx
    v = intr.fy * y_cam / z + intr.cy
    if clip_to_image and not (0 <= u < intr.width and 0 <= v < intr.height):
        return None
    return (u, v)
