#!/usr/bin/env python3
"""Generate the shipped scenario assets: lab maps and scripted teachings.

Writes scenarios/maps/*.pgm/.meta plus carpet.json, correctness.json,
gapped.json and suite/border01..10.json. Run with --check to execute every
scenario and print closure/accuracy diagnostics (used to tune scripts).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from borderforge.grid import FREE, OCCUPIED, GridOrigin, OccupancyGrid, save_map

RES = 0.025
LAB_W, LAB_H = 6.1, 3.5          # meters
WALL_CELLS = 2
SPEED = 0.12                      # commanded laser speed, m/s
LEAD = 0.4                        # follow controller stop distance
CARPET = (1.2, 0.8, 3.2, 2.05)    # carpet.json rectangle
CARPET2 = (3.6, 1.0, 5.6, 2.25)   # correctness.json carpet rectangle

SCENARIO_CAMERA = {"fx": 262.5, "fy": 262.5, "cx": 159.5, "cy": 119.5,
                   "width": 320, "height": 240}


def lab_cells() -> np.ndarray:
    w = round(LAB_W / RES)
    h = round(LAB_H / RES)
    cells = np.full((h, w), FREE, dtype=np.uint8)
    cells[:WALL_CELLS, :] = OCCUPIED
    cells[-WALL_CELLS:, :] = OCCUPIED
    cells[:, :WALL_CELLS] = OCCUPIED
    cells[:, -WALL_CELLS:] = OCCUPIED
    return cells


def paint_rect(cells: np.ndarray, rect: tuple[float, float, float, float]) -> None:
    x0, y0, x1, y1 = rect
    cells[round(y0 / RES):round(y1 / RES), round(x0 / RES):round(x1 / RES)] = OCCUPIED


def grid_from(cells: np.ndarray) -> OccupancyGrid:
    return OccupancyGrid(RES, GridOrigin(), cells)


def _unit(dx: float, dy: float) -> tuple[float, float]:
    n = math.hypot(dx, dy)
    return dx / n, dy / n


def path_script(points: list[tuple[float, float]], t0: float,
                speed: float = SPEED) -> tuple[list[dict], float]:
    """Timed waypoints along a polyline at constant speed, starting at t0."""
    script = [{"t": round(t0, 3), "x": points[0][0], "y": points[0][1]}]
    t = t0
    for a, b in zip(points, points[1:]):
        t += math.dist(a, b) / speed
        script.append({"t": round(t, 3), "x": b[0], "y": b[1]})
    return script, t


def teaching_script(border: list[tuple[float, float]], closed_park: tuple[float, float] | None,
                    spawn_back: float = 0.7, side: float = 1.0):
    """Build spawn, laser script, and events for one taught border.

    The robot spawns behind the first border point, is guided to it, then
    the spot leads along the border. For loops, closed_park is the inside
    point where the spot finally parks (it doubles as the keep-off seed);
    for simple chains the spot re-parks 0.8 m ahead of the robot, rotated
    0.4 rad toward the keep-off side (side=+1 left, -1 right of the final
    heading). The spot then holds its park so the keep-off seed is exact.
    """
    p0 = border[0]
    d0 = _unit(border[1][0] - p0[0], border[1][1] - p0[1])
    spawn = (p0[0] - spawn_back * d0[0], p0[1] - spawn_back * d0[1],
             math.atan2(d0[1], d0[0]))
    park0 = (p0[0] + LEAD * d0[0], p0[1] + LEAD * d0[1])

    t_next1 = round(spawn_back / 0.2 + 3.0, 2)
    script = [{"t": 0.0, "x": park0[0], "y": park0[1]},
              {"t": t_next1, "x": park0[0], "y": park0[1]}]
    events = [{"t": t_next1, "event": "next"}]

    dlast = _unit(border[-1][0] - border[-2][0], border[-1][1] - border[-2][1])
    if closed_park is None:
        # the robot stops one following-distance behind the parked spot, so
        # overshooting by LEAD parks the chain end on the border's last point
        end_park = (border[-1][0] + 0.42 * dlast[0], border[-1][1] + 0.42 * dlast[1])
    else:
        end_park = closed_park
    leg, t_park = path_script([park0] + border[1:] + [end_park], t_next1)
    script.extend(leg[1:])

    t_next2 = round(t_park + 3.5, 2)
    events.append({"t": t_next2, "event": "next"})
    if closed_park is None:
        ang = math.atan2(dlast[1], dlast[0]) + side * 0.4
        r_park = (border[-1][0] + 0.8 * math.cos(ang),
                  border[-1][1] + 0.8 * math.sin(ang))
        t_next3 = round(t_next2 + 3.2, 2)
        script.append({"t": round(t_next2 + 0.1, 3), "off": True})
        script.append({"t": round(t_next2 + 0.4, 3), "x": r_park[0], "y": r_park[1]})
        script.append({"t": round(t_next3 + 0.3, 3), "x": r_park[0], "y": r_park[1]})
        last_park = r_park
    else:
        script.append({"t": round(t_park + 900.0, 3), "x": end_park[0], "y": end_park[1]})
        t_next3 = round(t_next2 + 2.8, 2)
        last_park = end_park
    events.append({"t": t_next3, "event": "next"})
    return spawn, script, events, t_next3 + 0.8, last_park


def base_scenario(name: str, seed: int, spawn, script, events, duration: float,
                  prior: str, gt: str | None = None, extra_scene: dict | None = None,
                  perception_every: int = 4, expect: dict | None = None) -> dict:
    scene = {"floor": {"kind": "noise", "base": 120.0, "amplitude": 18.0,
                       "texel": 0.04}}
    if extra_scene:
        scene.update(extra_scene)
    data = {
        "name": name,
        "seed": seed,
        "dt": 0.05,
        "duration": round(duration, 2),
        "perception_every": perception_every,
        "prior_map": prior,
        "spawn": [round(v, 4) for v in spawn],
        "intrinsics": SCENARIO_CAMERA,
        "mounting": {"height": 0.35, "pitch": 0.45, "forward": 0.0},
        "controller": {"k_theta": 1.5, "k_v": 4.0, "d_stop": 0.4, "d_cap": 2.0},
        "scene": scene,
        "laser_script": [
            {k: (round(v, 4) if isinstance(v, float) else v) for k, v in wp.items()}
            for wp in script
        ],
        "events": events,
    }
    if gt:
        data["ground_truth_map"] = gt
    if expect:
        data["expect"] = expect
    return data


def carpet_border(rect, inset_park=(0.5, 0.15)):
    """CCW rectangle border starting at the bottom-left corner heading +x,
    overshooting below the corner, then parking inside."""
    x0, y0, x1, y1 = rect
    border = [(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0 - 0.25)]
    park = (x0 + inset_park[0], y0 + inset_park[1])
    return border, park


def serpentine(length: float, start=(1.0, 0.7), connector=1.1):
    """Five-leg serpentine of the requested total length inside the lab.

    Every border has the same shape family (three equal horizontal legs,
    two fixed connectors, four corners), so corner-cut losses in the taught
    chain are a constant offset across the suite rather than a slope bias.
    """
    leg = (length - 2 * connector) / 3.0
    if leg <= 0.3:
        raise ValueError(f"length {length} too short for the serpentine family")
    x0, y0 = start
    return [
        (x0, y0),
        (round(x0 + leg, 3), y0),
        (round(x0 + leg, 3), round(y0 + connector, 3)),
        (x0, round(y0 + connector, 3)),
        (x0, round(y0 + 2 * connector, 3)),
        (round(x0 + leg, 3), round(y0 + 2 * connector, 3)),
    ]


def build(out_dir: Path) -> list[Path]:
    maps_dir = out_dir / "maps"
    maps_dir.mkdir(parents=True, exist_ok=True)
    written = []

    lab = lab_cells()
    save_map(grid_from(lab), maps_dir / "lab")

    gt_carpet = lab_cells()
    paint_rect(gt_carpet, CARPET)
    save_map(grid_from(gt_carpet), maps_dir / "lab_carpet_gt")

    pillar = lab_cells()
    paint_rect(pillar, (2.95, 1.7, 3.05, 1.8))
    save_map(grid_from(pillar), maps_dir / "lab_pillar")

    # carpet accuracy scenario
    border, park = carpet_border(CARPET)
    spawn, script, events, duration, _ = teaching_script(border, park)
    carpet = base_scenario(
        "carpet", seed=7, spawn=spawn, script=script, events=events,
        duration=duration, prior="maps/lab", gt="maps/lab_carpet_gt",
        extra_scene={"distractors": [
            {"kind": "matte_rect", "x0": CARPET[0], "y0": CARPET[1],
             "x1": CARPET[2], "y1": CARPET[3], "color": [95, 88, 82]},
        ]},
        expect={"min_jaccard": 0.85, "borders": 1},
    )
    path = out_dir / "carpet.json"
    path.write_text(json.dumps(carpet, indent=2) + "\n")
    written.append(path)

    # correctness scenario: separating curve, then a carpet loop
    sep_border = [(1.5, 0.9), (1.5, 2.45)]
    spawn1, script1, events1, t_done1, park1 = teaching_script(sep_border, None, side=1.0)
    border2, park2 = carpet_border(CARPET2)
    # guide from the border-1 keep-off park toward border 2's approach corner,
    # sweeping a gentle clockwise arc the follower can keep in view
    p0b = border2[0]
    d0b = _unit(border2[1][0] - p0b[0], border2[1][1] - p0b[1])
    park0b = (p0b[0] + LEAD * d0b[0], p0b[1] + LEAD * d0b[1])
    arc_c, arc_r = (1.7, 2.25), 1.0
    arc = [(arc_c[0] + arc_r * math.cos(math.radians(a)),
            arc_c[1] + arc_r * math.sin(math.radians(a)))
           for a in range(100, -51, -25)]
    guide_points = [park1] + [(round(x, 3), round(y, 3)) for x, y in arc] \
        + [(3.0, 1.2), (3.2, 1.0), park0b]
    guide, t_at_corner = path_script(guide_points, t_done1 + 0.4, speed=0.16)
    t_next1b = round(t_at_corner + 4.0, 2)
    script2 = guide + [{"t": t_next1b, "x": park0b[0], "y": park0b[1]}]
    events2 = [{"t": t_next1b, "event": "next"}]
    leg, t_park2 = path_script([park0b] + border2[1:] + [park2], t_next1b)
    script2.extend(leg[1:])
    t_next2b = round(t_park2 + 3.5, 2)
    t_next3b = round(t_next2b + 2.8, 2)
    events2 += [{"t": t_next2b, "event": "next"}, {"t": t_next3b, "event": "next"}]
    script2.append({"t": round(t_park2 + 900.0, 3), "x": park2[0], "y": park2[1]})
    correctness = base_scenario(
        "correctness", seed=11, spawn=spawn1, script=script1 + script2,
        events=events1 + events2, duration=t_next3b + 0.8, prior="maps/lab",
        extra_scene={"distractors": [
            {"kind": "matte_rect", "x0": CARPET2[0], "y0": CARPET2[1],
             "x1": CARPET2[2], "y1": CARPET2[3], "color": [95, 88, 82]},
        ]},
        expect={"borders": 2},
    )
    path = out_dir / "correctness.json"
    path.write_text(json.dumps(correctness, indent=2) + "\n")
    written.append(path)

    # gapped border: the end-segment ray anchors on a pillar the free space
    # flows around, so partitioning must fail
    gap_border = [(1.9, 1.05), (2.75, 1.55)]
    spawn_g, script_g, events_g, duration_g, _ = teaching_script(gap_border, None, side=1.0)
    gapped = base_scenario(
        "gapped", seed=13, spawn=spawn_g, script=script_g, events=events_g,
        duration=duration_g, prior="maps/lab_pillar",
        extra_scene={"walls": [
            {"x0": 2.95, "y0": 1.7, "x1": 3.05, "y1": 1.8, "height": 0.5},
        ]},
        expect={"borders": 1},
    )
    path = out_dir / "gapped.json"
    path.write_text(json.dumps(gapped, indent=2) + "\n")
    written.append(path)

    # teaching-time suite: ten serpentine borders, 4 m to 13 m
    suite_dir = out_dir / "suite"
    suite_dir.mkdir(exist_ok=True)
    for i, length in enumerate(range(4, 14), start=1):
        pts = serpentine(float(length), start=(1.0, 0.7))
        spawn_s, script_s, events_s, duration_s, _ = teaching_script(pts, None, side=1.0)
        scenario = base_scenario(
            f"border{i:02d}", seed=100 + i, spawn=spawn_s, script=script_s,
            events=events_s, duration=duration_s, prior="../maps/lab",
            perception_every=5, expect={"borders": 1},
        )
        path = suite_dir / f"border{i:02d}.json"
        path.write_text(json.dumps(scenario, indent=2) + "\n")
        written.append(path)
    return written


def check(out_dir: Path) -> None:
    from borderforge.evaluate import run_scenario
    from borderforge.scenario import load_scenario

    for path in sorted(out_dir.glob("*.json")) + sorted((out_dir / "suite").glob("*.json")):
        scenario = load_scenario(path)
        report = run_scenario(scenario)
        print(f"{scenario.name:12s} borders={len(report.borders)} "
              f"kinds={[b.kind for b in report.borders]} "
              f"len={report.border_length:6.2f} t={report.teaching_time:6.1f} "
              f"J={report.jaccard if report.jaccard is None else round(report.jaccard, 4)} "
              f"errors={report.errors} passed={report.passed}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default=str(ROOT / "scenarios"))
    parser.add_argument("--check", action="store_true",
                        help="run every generated scenario and print diagnostics")
    args = parser.parse_args()
    out_dir = Path(args.out)
    written = build(out_dir)
    print(f"wrote {len(written)} scenario files under {out_dir}")
    if args.check:
        check(out_dir)


if __name__ == "__main__":
    main()
