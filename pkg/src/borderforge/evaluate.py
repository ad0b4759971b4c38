"""Accuracy and teaching-time metrics plus the scenario driver.

Accuracy is the Jaccard index over virtual keep-off cells only (cells
Occupied in a posterior but not in the prior), which keeps scores
comparable across physical environments. Teaching time is simulated time
spent in the Record state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .border import PolygonalChain
from .errors import DegenerateFit, UndefinedIndex
from .grid import OCCUPIED, CellCoord, OccupancyGrid


def jaccard(gt: set[CellCoord], ud: set[CellCoord]) -> float:
    """|GT n UD| / |GT u UD| over keep-off area cells."""
    union = len(gt | ud)
    if union == 0:
        raise UndefinedIndex("jaccard of two empty sets")
    return len(gt & ud) / union


def virtual_area_cells(prior: OccupancyGrid, posterior: OccupancyGrid) -> set[CellCoord]:
    """Cells occupied by teaching: Occupied in the posterior, not the prior."""
    fresh = (posterior.cells == OCCUPIED) & (prior.cells != OCCUPIED)
    ys, xs = np.nonzero(fresh)
    return {(int(x), int(y)) for x, y in zip(xs, ys)}


def border_length(chain: PolygonalChain, closed: bool = False) -> float:
    """Sum of segment lengths; a closed chain includes the closing segment."""
    total = sum(math.dist(a, b) for a, b in zip(chain.points, chain.points[1:]))
    if closed:
        total += math.dist(chain.points[-1], chain.points[0])
    return total


@dataclass(frozen=True)
class BorderReport:
    kind: str
    length: float
    teaching_time: float


@dataclass
class ScenarioReport:
    scenario: str
    seed: int
    jaccard: float | None = None
    teaching_time: float = 0.0
    border_length: float = 0.0
    borders: list[BorderReport] = field(default_factory=list)
    criteria: dict[str, bool] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.errors and all(self.criteria.values())

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "jaccard": self.jaccard,
            "teaching_time": self.teaching_time,
            "border_length": self.border_length,
            "borders": [vars(b) for b in self.borders],
            "criteria": self.criteria,
            "errors": self.errors,
            "passed": self.passed,
        }


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float


def fit_time_length(reports) -> LinearFit:
    """Ordinary least squares of teaching time on border length.

    Accepts ScenarioReports or (length, time) pairs; needs at least three
    samples and at least two distinct lengths.
    """
    pairs = []
    for r in reports:
        if isinstance(r, ScenarioReport):
            pairs.append((r.border_length, r.teaching_time))
        else:
            pairs.append((float(r[0]), float(r[1])))
    if len(pairs) < 3:
        raise ValueError(f"need at least 3 reports, got {len(pairs)}")
    lengths = np.array([p[0] for p in pairs])
    times = np.array([p[1] for p in pairs])
    if np.ptp(lengths) < 1e-12:
        raise DegenerateFit("all border lengths are equal")
    slope, intercept = np.polyfit(lengths, times, 1)
    predicted = slope * lengths + intercept
    ss_res = float(np.sum((times - predicted) ** 2))
    ss_tot = float(np.sum((times - times.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return LinearFit(float(slope), float(intercept), r_squared)


def run_scenario(scenario, out_dir=None) -> ScenarioReport:
    """Execute a scenario file's scripted teaching through the closed loop.

    Accepts a path or a loaded Scenario; writes the posterior map, report
    and session log when out_dir is given.
    """
    from .scenario import Scenario, load_scenario
    from .simulate import Simulation

    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    sim = Simulation(scenario)
    sim.run()
    report = sim.build_report()
    if out_dir is not None:
        sim.write_outputs(out_dir, report)
    return report
