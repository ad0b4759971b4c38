"""Trinary occupancy grids: world/cell geometry and PGM map file I/O.

Cells are Free, Occupied or Unknown. Row 0 is the bottom of the world
(y grows upward); the PGM payload is stored top-down and flipped on load.
Grids are immutable after construction; updates produce new grids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import MalformedFile, OutOfBounds

FREE = 0
OCCUPIED = 1
UNKNOWN = 2

# Gray levels of the de-facto robot map-server PGM convention.
PGM_OCCUPIED = 0
PGM_FREE = 254
PGM_UNKNOWN = 205

CellCoord = tuple[int, int]  # (x, y) cell indices, x = column, y = row
WorldPoint = tuple[float, float]  # meters


@dataclass(frozen=True)
class GridOrigin:
    """World pose of the corner of cell (0, 0)."""

    x: float = 0.0
    y: float = 0.0
    theta: float = 0.0


@dataclass(frozen=True)
class OccupancyGrid:
    resolution: float
    origin: GridOrigin
    cells: np.ndarray = field(repr=False)  # shape (height, width), row 0 = bottom

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.cells.ndim != 2 or self.cells.size == 0:
            raise ValueError("cells must be a non-empty 2D array")
        arr = np.ascontiguousarray(self.cells, dtype=np.uint8)
        if not np.isin(arr, (FREE, OCCUPIED, UNKNOWN)).all():
            raise ValueError("cells must hold only Free/Occupied/Unknown")
        arr.flags.writeable = False
        object.__setattr__(self, "cells", arr)

    @property
    def width(self) -> int:
        return self.cells.shape[1]

    @property
    def height(self) -> int:
        return self.cells.shape[0]

    def in_bounds(self, c: CellCoord) -> bool:
        x, y = c
        return 0 <= x < self.width and 0 <= y < self.height

    def at(self, c: CellCoord) -> int:
        if not self.in_bounds(c):
            raise OutOfBounds(f"cell {c} outside {self.width}x{self.height} grid")
        return int(self.cells[c[1], c[0]])

    def with_cells(self, cells: np.ndarray) -> "OccupancyGrid":
        return OccupancyGrid(self.resolution, self.origin, cells)

    def free_cells(self) -> set[CellCoord]:
        ys, xs = np.nonzero(self.cells == FREE)
        return {(int(x), int(y)) for x, y in zip(xs, ys)}


def make_grid(width: int, height: int, resolution: float,
              origin: GridOrigin = GridOrigin(), fill: int = FREE) -> OccupancyGrid:
    if width <= 0 or height <= 0:
        raise ValueError("grid extent must be positive")
    return OccupancyGrid(resolution, origin, np.full((height, width), fill, dtype=np.uint8))


def world_to_cell(grid: OccupancyGrid, p: WorldPoint) -> CellCoord:
    """Map a world point to the cell containing it.

    Rotates by -origin.theta, then floors the offset divided by resolution.
    """
    dx = p[0] - grid.origin.x
    dy = p[1] - grid.origin.y
    ct, st = math.cos(grid.origin.theta), math.sin(grid.origin.theta)
    lx = ct * dx + st * dy
    ly = -st * dx + ct * dy
    c = (math.floor(lx / grid.resolution), math.floor(ly / grid.resolution))
    if not grid.in_bounds(c):
        raise OutOfBounds(f"world point {p} maps to cell {c} outside the grid")
    return c


def cell_to_world(grid: OccupancyGrid, c: CellCoord) -> WorldPoint:
    """World coordinates of the center of cell c."""
    if not grid.in_bounds(c):
        raise OutOfBounds(f"cell {c} outside {grid.width}x{grid.height} grid")
    lx = (c[0] + 0.5) * grid.resolution
    ly = (c[1] + 0.5) * grid.resolution
    ct, st = math.cos(grid.origin.theta), math.sin(grid.origin.theta)
    return (grid.origin.x + ct * lx - st * ly,
            grid.origin.y + st * lx + ct * ly)


def _read_pgm_tokens(data: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    """Read whitespace-separated header tokens, skipping '#' comment lines."""
    tokens: list[bytes] = []
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos] in b" \t\r\n":
            pos += 1
        if pos >= n:
            raise MalformedFile("truncated PGM header")
        if data[pos] == ord("#"):
            while pos < n and data[pos] != ord("\n"):
                pos += 1
            continue
        start = pos
        while pos < n and data[pos] not in b" \t\r\n":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def save_map(grid: OccupancyGrid, path: str | Path) -> None:
    """Write `<path>.pgm` (binary P5) and `<path>.meta` for a grid.

    Encodings: Occupied -> 0, Free -> 254, Unknown -> 205. The payload is
    written top row first, so the bottom-up cell array is flipped here.
    """
    path = Path(path)
    base = path.with_suffix("") if path.suffix in (".pgm", ".meta") else path
    lut = np.zeros(3, dtype=np.uint8)
    lut[FREE] = PGM_FREE
    lut[OCCUPIED] = PGM_OCCUPIED
    lut[UNKNOWN] = PGM_UNKNOWN
    pixels = lut[grid.cells[::-1, :]]
    header = f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii")
    base.with_suffix(".pgm").write_bytes(header + pixels.tobytes())
    meta = (f"resolution: {grid.resolution!r}\n"
            f"origin: {grid.origin.x!r} {grid.origin.y!r} {grid.origin.theta!r}\n"
            f"negate: 0\n")
    base.with_suffix(".meta").write_text(meta, encoding="ascii")


def load_map(path: str | Path) -> OccupancyGrid:
    """Load a `<name>.pgm` + `<name>.meta` pair into a trinary grid.

    Pixel mapping: 0 -> Occupied, 254-255 -> Free, anything else -> Unknown.
    """
    path = Path(path)
    base = path.with_suffix("") if path.suffix in (".pgm", ".meta") else path
    pgm_path = base.with_suffix(".pgm")
    meta_path = base.with_suffix(".meta")
    if not pgm_path.exists():
        raise MalformedFile(f"missing PGM file: {pgm_path}")
    if not meta_path.exists():
        raise MalformedFile(f"missing metadata file: {meta_path}")

    data = pgm_path.read_bytes()
    (magic,), pos = _read_pgm_tokens(data, 1, 0)
    if magic != b"P5":
        raise MalformedFile(f"bad magic {magic!r}, expected P5")
    (w_tok, h_tok, maxval_tok), pos = _read_pgm_tokens(data, 3, pos)
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(maxval_tok)
    except ValueError as exc:
        raise MalformedFile("non-numeric PGM dimensions") from exc
    if maxval != 255:
        raise MalformedFile(f"unsupported maxval {maxval}, expected 255")
    if width <= 0 or height <= 0:
        raise MalformedFile("non-positive PGM dimensions")
    pos += 1  # single whitespace byte after maxval
    payload = data[pos:pos + width * height]
    if len(payload) < width * height:
        raise MalformedFile(f"truncated payload: {len(payload)} of {width * height} bytes")
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)

    meta: dict[str, str] = {}
    for line in meta_path.read_text(encoding="ascii").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if ":" not in line:
            raise MalformedFile(f"bad metadata line: {line!r}")
        key, value = line.split(":", 1)
        meta[key.strip()] = value.strip()
    for key in ("resolution", "origin", "negate"):
        if key not in meta:
            raise MalformedFile(f"missing metadata key: {key}")
    try:
        resolution = float(meta["resolution"])
        ox, oy, otheta = (float(v) for v in meta["origin"].split())
    except ValueError as exc:
        raise MalformedFile("non-numeric metadata value") from exc

    cells = np.full((height, width), UNKNOWN, dtype=np.uint8)
    cells[pixels == PGM_OCCUPIED] = OCCUPIED
    cells[pixels >= 254] = FREE
    return OccupancyGrid(resolution, GridOrigin(ox, oy, otheta), cells[::-1, :])
