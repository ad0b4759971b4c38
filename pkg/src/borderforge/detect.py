"""Multi-stage laser point detection on rendered frames.

Stages: red-and-locally-bright candidate mask, 8-connected blob
extraction, morphology filtering (area, circularity, center brightness),
and brightest-candidate selection. Absence of a spot is a value (None),
never an error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .scene import RenderedFrame

_SQRT2 = math.sqrt(2.0)

# Moore-neighborhood offsets in clockwise order starting east.
_MOORE = ((1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1))


@dataclass(frozen=True)
class DetectionParams:
    red_bands: tuple[tuple[int, int], ...] = ((0, 10), (170, 179))
    min_saturation: int = 80
    window: int = 31          # local-brightness window size, pixels
    delta: float = 40.0       # required V margin over the window mean
    area_min: int = 3
    area_max: int = 200
    circularity_min: float = 0.6
    center_v_min: int = 200

    def __post_init__(self):
        for lo, hi in self.red_bands:
            if not (0 <= lo <= hi < 180):
                raise ValueError(f"hue band ({lo},{hi}) outside [0,180)")
        if self.area_min > self.area_max:
            raise ValueError("area_min must not exceed area_max")
        if not (0 < self.circularity_min <= 1):
            raise ValueError("circularity_min must be in (0, 1]")
        if not (0 <= self.center_v_min <= 255):
            raise ValueError("center_v_min must be in [0, 255]")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("window must be a positive odd size")


@dataclass(frozen=True)
class BlobCandidate:
    center: tuple[float, float]  # (x, y) centroid, pixels
    area: int
    perimeter: float

    @property
    def circularity(self) -> float:
        return 4.0 * math.pi * self.area / (self.perimeter * self.perimeter)


def candidate_mask(frame: RenderedFrame, params: DetectionParams = DetectionParams()) -> np.ndarray:
    """Boolean mask of pixels that are red and brighter than their window mean.

    The window mean is only evaluated at pixels that already pass the color
    gates; the result is identical to a dense conjunction of both images.
    """
    h = frame.hsv[..., 0]
    s = frame.hsv[..., 1]
    v = frame.hsv[..., 2]
    red = np.zeros(h.shape, dtype=bool)
    for lo, hi in params.red_bands:
        red |= (h >= lo) & (h <= hi)
    red &= s >= params.min_saturation

    mask = np.zeros(red.shape, dtype=bool)
    ys, xs = np.nonzero(red)
    if not len(ys):
        return mask
    height, width = v.shape
    half = params.window // 2
    integral = np.zeros((height + 1, width + 1), dtype=np.float64)
    np.cumsum(np.cumsum(v, axis=0, dtype=np.float64), axis=1, out=integral[1:, 1:])
    y0 = np.clip(ys - half, 0, height)
    y1 = np.clip(ys + half + 1, 0, height)
    x0 = np.clip(xs - half, 0, width)
    x1 = np.clip(xs + half + 1, 0, width)
    total = (integral[y1, x1] - integral[y0, x1]
             - integral[y1, x0] + integral[y0, x0])
    mean = total / ((y1 - y0) * (x1 - x0))
    bright = v[ys, xs] > mean + params.delta
    mask[ys[bright], xs[bright]] = True
    return mask


def _trace_perimeter(pixels: set[tuple[int, int]], start: tuple[int, int]) -> float:
    """Moore contour chain length (diagonal steps sqrt(2)) plus the
    half-pixel corner margin of 4; a lone pixel has perimeter 4."""
    # Find first neighbor clockwise from west (the scan guarantees the
    # west neighbor of the start pixel is background).
    begin = _MOORE.index((-1, 0))
    current = start
    prev_dir = begin
    length = 0.0
    first_move = None
    while True:
        found = None
        for k in range(1, 9):
            idx = (prev_dir + k) % 8
            dx, dy = _MOORE[idx]
            nxt = (current[0] + dx, current[1] + dy)
            if nxt in pixels:
                found = (idx, nxt)
                break
        if found is None:
            return 4.0  # isolated pixel
        idx, nxt = found
        if first_move is None:
            first_move = (current, idx)
        elif (current, idx) == first_move:
            break
        length += _SQRT2 if (_MOORE[idx][0] and _MOORE[idx][1]) else 1.0
        current = nxt
        prev_dir = (idx + 4 + 1) % 8  # re-enter search after the backtrack direction
        if length > 8 * len(pixels) + 16:
            break  # safety net; cannot trigger on genuine 8-connected blobs
    return length + 4.0


def extract_blobs(mask: np.ndarray) -> list[BlobCandidate]:
    """8-connected components of a binary mask, row-major by centroid."""
    ys, xs = np.nonzero(mask)
    if len(xs) == 0:
        return []
    remaining = {(int(x), int(y)) for x, y in zip(xs, ys)}
    blobs: list[BlobCandidate] = []
    while remaining:
        seed = next(iter(remaining))
        stack = [seed]
        remaining.discard(seed)
        component = {seed}
        while stack:
            cx, cy = stack.pop()
            for dx, dy in _MOORE:
                nb = (cx + dx, cy + dy)
                if nb in remaining:
                    remaining.discard(nb)
                    component.add(nb)
                    stack.append(nb)
        start = min(component, key=lambda p: (p[1], p[0]))
        n = len(component)
        cx_mean = sum(p[0] for p in component) / n
        cy_mean = sum(p[1] for p in component) / n
        blobs.append(BlobCandidate(center=(cx_mean, cy_mean), area=n,
                                   perimeter=_trace_perimeter(component, start)))
    blobs.sort(key=lambda blob: (blob.center[1], blob.center[0]))
    return blobs


def _center_v(frame: RenderedFrame, blob: BlobCandidate) -> int:
    x = min(max(int(round(blob.center[0])), 0), frame.width - 1)
    y = min(max(int(round(blob.center[1])), 0), frame.height - 1)
    return int(frame.hsv[y, x, 2])


def filter_blobs(blobs: list[BlobCandidate], frame: RenderedFrame,
                 params: DetectionParams = DetectionParams()) -> list[BlobCandidate]:
    """Keep blobs matching the laser's morphology and center brightness."""
    kept = []
    for blob in blobs:
        if not (params.area_min <= blob.area <= params.area_max):
            continue
        if blob.circularity < params.circularity_min:
            continue
        if _center_v(frame, blob) < params.center_v_min:
            continue
        kept.append(blob)
    return kept


def select_brightest(blobs: list[BlobCandidate],
                     frame: RenderedFrame) -> tuple[float, float] | None:
    """Centroid of the candidate with the highest V; ties break toward the
    smaller row, then the smaller column."""
    if not blobs:
        return None
    best = min(blobs, key=lambda blob: (-_center_v(frame, blob),
                                        blob.center[1], blob.center[0]))
    return best.center


def detect_laser_point(frame: RenderedFrame,
                       params: DetectionParams = DetectionParams()) -> tuple[float, float] | None:
    mask = candidate_mask(frame, params)
    blobs = filter_blobs(extract_blobs(mask), frame, params)
    return select_brightest(blobs, frame)
