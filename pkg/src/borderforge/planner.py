"""4-connected A* path planning on occupancy grids.

Used to demonstrate that taught borders change navigation: paths before
and after integration, and unreachability of goals inside a keep-off area.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass

from .errors import NoPath
from .grid import FREE, CellCoord, OccupancyGrid

_NEIGHBORS = ((0, 1), (0, -1), (1, 0), (-1, 0))


@dataclass(frozen=True)
class PlannedPath:
    cells: tuple[CellCoord, ...]
    resolution: float

    @property
    def length(self) -> float:
        """Metric length: one resolution unit per 4-connected step."""
        return (len(self.cells) - 1) * self.resolution


def plan_path(grid: OccupancyGrid, start: CellCoord, goal: CellCoord) -> PlannedPath:
    """Shortest 4-connected path by A* with a Manhattan heuristic.

    Ties on f-score break toward the smaller row, then the smaller column,
    so plans are deterministic. Occupied and Unknown cells are untraversable;
    a non-free start or goal raises NoPath.
    """
    for name, cell in (("start", start), ("goal", goal)):
        if not grid.in_bounds(cell) or grid.at(cell) != FREE:
            raise NoPath(f"{name} cell {cell} is not free")

    def heuristic(c: CellCoord) -> int:
        return abs(c[0] - goal[0]) + abs(c[1] - goal[1])

    free = grid.cells == FREE
    g_score = {start: 0}
    came_from: dict[CellCoord, CellCoord] = {}
    open_heap: list[tuple[int, int, int]] = [(heuristic(start), start[1], start[0])]
    closed: set[CellCoord] = set()
    while open_heap:
        _, y, x = heapq.heappop(open_heap)
        current = (x, y)
        if current in closed:
            continue
        closed.add(current)
        if current == goal:
            cells = [current]
            while current in came_from:
                current = came_from[current]
                cells.append(current)
            cells.reverse()
            return PlannedPath(tuple(cells), grid.resolution)
        g_here = g_score[current]
        for dx, dy in _NEIGHBORS:
            nb = (x + dx, y + dy)
            if not (0 <= nb[0] < grid.width and 0 <= nb[1] < grid.height):
                continue
            if not free[nb[1], nb[0]] or nb in closed:
                continue
            tentative = g_here + 1
            if tentative < g_score.get(nb, 1 << 30):
                g_score[nb] = tentative
                came_from[nb] = current
                heapq.heappush(open_heap, (tentative + heuristic(nb), nb[1], nb[0]))
    raise NoPath(f"goal {goal} unreachable from {start}")


def path_intersects(path: PlannedPath, region: set[CellCoord]) -> bool:
    return any(cell in region for cell in path.cells)
