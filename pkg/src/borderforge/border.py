"""Virtual border integration: from recorded poses to a posterior map.

The recorded pose history becomes a polygonal chain, classified closed or
simple by endpoint distance. Simple chains get their end segments extended
as rays until they anchor on an obstacle or the map edge, so the chain
actually splits the free space. The chain raster (8-connected Bresenham)
plus non-free prior cells bound a 4-connected flood fill from the last
laser position; the filled region and the border cells become Occupied in
the posterior, every other cell keeps its prior value.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (DegenerateChain, ExtensionFailed, InvalidSeed, OutOfBounds,
                     PartitionFailed)
from .grid import (FREE, OCCUPIED, CellCoord, OccupancyGrid, WorldPoint,
                   cell_to_world, world_to_cell)
from .robot import PoseHistory

DEFAULT_CLOSURE_THRESHOLD = 0.30  # m between chain endpoints


class BorderKind(Enum):
    SIMPLE = "simple"
    CLOSED = "closed"


@dataclass(frozen=True)
class PolygonalChain:
    points: tuple[WorldPoint, ...]

    def __post_init__(self):
        if len(self.points) < 2:
            raise ValueError("a chain needs at least two points")
        for a, b in zip(self.points, self.points[1:]):
            if a == b:
                raise ValueError("consecutive chain points must be distinct")

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class PartitionResult:
    connected: frozenset[CellCoord]     # cells reachable from the seed
    complement: frozenset[CellCoord]    # free cells cut off by the border
    border_cells: frozenset[CellCoord]


def extract_chain(history: PoseHistory, min_spacing: float = 0.025) -> PolygonalChain:
    """Project recorded poses to (x, y), collapsing sub-cell jitter."""
    if len(history) < 2:
        raise DegenerateChain(f"need at least 2 recorded poses, got {len(history)}")
    points: list[WorldPoint] = []
    for pose in history.poses:
        p = (pose.x, pose.y)
        if points and math.dist(points[-1], p) < min_spacing:
            continue
        points.append(p)
    if len(points) < 2:
        raise DegenerateChain("recorded poses collapse to a single point")
    return PolygonalChain(tuple(points))


def classify_chain(chain: PolygonalChain,
                   closure_threshold: float = DEFAULT_CLOSURE_THRESHOLD) -> BorderKind:
    gap = math.dist(chain.points[0], chain.points[-1])
    return BorderKind.CLOSED if gap < closure_threshold else BorderKind.SIMPLE


def _march_ray(start: WorldPoint, direction: tuple[float, float],
               grid: OccupancyGrid) -> WorldPoint:
    """Walk from start along direction; return the center of the first
    non-free cell hit, or of the last in-bounds cell at the map edge."""
    norm = math.hypot(*direction)
    if norm < 1e-12:
        raise ExtensionFailed("end segment has no direction to extend along")
    ux, uy = direction[0] / norm, direction[1] / norm
    stride = grid.resolution / 4.0
    last_cell = None
    k = 1
    while True:
        p = (start[0] + ux * stride * k, start[1] + uy * stride * k)
        try:
            cell = world_to_cell(grid, p)
        except OutOfBounds:
            if last_cell is None:
                return start
            return cell_to_world(grid, last_cell)
        if grid.at(cell) != FREE:
            return cell_to_world(grid, cell)
        last_cell = cell
        k += 1


def extend_open_chain(chain: PolygonalChain, grid: OccupancyGrid) -> PolygonalChain:
    """Linearize a simple chain: extend both end segments as rays clipped at
    the first obstacle or the map boundary."""
    p1, p2 = chain.points[0], chain.points[1]
    pn_1, pn = chain.points[-2], chain.points[-1]
    head = _march_ray(p1, (p1[0] - p2[0], p1[1] - p2[1]), grid)
    tail = _march_ray(pn, (pn[0] - pn_1[0], pn[1] - pn_1[1]), grid)
    points = list(chain.points)
    if head != p1:
        points.insert(0, head)
    if tail != pn:
        points.append(tail)
    return PolygonalChain(tuple(points))


def bresenham(c0: CellCoord, c1: CellCoord) -> list[CellCoord]:
    """8-connected raster of the segment between two cells, inclusive."""
    x0, y0 = c0
    x1, y1 = c1
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    cells = []
    while True:
        cells.append((x0, y0))
        if (x0, y0) == (x1, y1):
            return cells
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def rasterize_chain(chain: PolygonalChain, grid: OccupancyGrid,
                    closed: bool = False) -> set[CellCoord]:
    """Union of Bresenham rasters between consecutive vertices; a closed
    chain includes the segment from the last vertex back to the first."""
    vertices = [world_to_cell(grid, p) for p in chain.points]
    if closed:
        vertices.append(vertices[0])
    cells: set[CellCoord] = set()
    for a, b in zip(vertices, vertices[1:]):
        cells.update(bresenham(a, b))
    if not cells:
        cells.add(vertices[0])
    return cells


def partition_map(prior: OccupancyGrid, border_cells: set[CellCoord],
                  l_star: WorldPoint) -> PartitionResult:
    """4-connected flood fill over free cells from the last laser position,
    barred by border cells and everything not free in the prior."""
    seed = world_to_cell(prior, l_star)
    if seed in border_cells:
        raise InvalidSeed(f"laser cell {seed} lies on the border")
    if prior.at(seed) != FREE:
        raise InvalidSeed(f"laser cell {seed} is not free in the prior map")

    barrier = np.zeros(prior.cells.shape, dtype=bool)
    for x, y in border_cells:
        if 0 <= x < prior.width and 0 <= y < prior.height:
            barrier[y, x] = True
    passable = (prior.cells == FREE) & ~barrier

    reached = np.zeros_like(passable)
    queue = deque([seed])
    reached[seed[1], seed[0]] = True
    width, height = prior.width, prior.height
    while queue:
        x, y = queue.popleft()
        for nx, ny in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if 0 <= nx < width and 0 <= ny < height and passable[ny, nx] and not reached[ny, nx]:
                reached[ny, nx] = True
                queue.append((nx, ny))

    complement = passable & ~reached
    if not complement.any():
        raise PartitionFailed("border does not separate the free space")
    conn_y, conn_x = np.nonzero(reached)
    comp_y, comp_x = np.nonzero(complement)
    return PartitionResult(
        connected=frozenset((int(x), int(y)) for x, y in zip(conn_x, conn_y)),
        complement=frozenset((int(x), int(y)) for x, y in zip(comp_x, comp_y)),
        border_cells=frozenset(border_cells),
    )


def build_posterior(prior: OccupancyGrid, partition: PartitionResult) -> OccupancyGrid:
    """Occupy the connected area and the border cells; keep the rest."""
    cells = np.array(prior.cells)
    for x, y in partition.connected:
        cells[y, x] = OCCUPIED
    for x, y in partition.border_cells:
        if 0 <= x < prior.width and 0 <= y < prior.height:
            cells[y, x] = OCCUPIED
    return prior.with_cells(cells)


@dataclass(frozen=True)
class BorderIntegration:
    posterior: OccupancyGrid
    chain: PolygonalChain
    kind: BorderKind
    partition: PartitionResult


def integrate_border_details(prior: OccupancyGrid, history: PoseHistory,
                             l_star: WorldPoint,
                             closure_threshold: float = DEFAULT_CLOSURE_THRESHOLD
                             ) -> BorderIntegration:
    chain = extract_chain(history, min_spacing=prior.resolution)
    kind = classify_chain(chain, closure_threshold)
    raster_chain = chain if kind is BorderKind.CLOSED else extend_open_chain(chain, prior)
    border_cells = rasterize_chain(raster_chain, prior, closed=kind is BorderKind.CLOSED)
    partition = partition_map(prior, border_cells, l_star)
    return BorderIntegration(posterior=build_posterior(prior, partition),
                             chain=chain, kind=kind, partition=partition)


def integrate_border(prior: OccupancyGrid, history: PoseHistory, l_star: WorldPoint,
                     closure_threshold: float = DEFAULT_CLOSURE_THRESHOLD) -> OccupancyGrid:
    """Full pipeline; the result can serve as the prior for the next border."""
    return integrate_border_details(prior, history, l_star, closure_threshold).posterior
