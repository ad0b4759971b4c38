"""Command-line entry point: run, eval, render, serve.

Exit codes: 0 success, 1 operational error (bad inputs, missing files),
2 scenario criterion failure. Outputs only ever go under --out.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

from .errors import BorderforgeError, DegenerateFit
from .evaluate import fit_time_length, run_scenario
from .scenario import load_scenario

log = logging.getLogger("borderforge")


def _setup_logging() -> None:
    level = os.environ.get("BORDERFORGE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario, seed=args.seed, dt=args.dt)
    report = run_scenario(scenario, out_dir=args.out)
    print(json.dumps(report.to_dict(), sort_keys=True, indent=2))
    return 0 if report.passed else 2


def _plan_report(prior_path, out_dir: Path, plan_spec: str) -> dict:
    """Plan start->goal on the prior and the taught posterior and report
    lengths plus intersections with the taught keep-off cells."""
    from .errors import NoPath
    from .evaluate import virtual_area_cells
    from .grid import load_map, world_to_cell
    from .planner import path_intersects, plan_path

    x0, y0, x1, y1 = (float(v) for v in plan_spec.split(","))
    prior = load_map(prior_path)
    posterior = load_map(out_dir / "posterior")
    taught = virtual_area_cells(prior, posterior)
    result: dict = {"start": [x0, y0], "goal": [x1, y1],
                    "taught_cells": len(taught)}
    for label, grid in (("before", prior), ("after", posterior)):
        try:
            path = plan_path(grid, world_to_cell(grid, (x0, y0)),
                             world_to_cell(grid, (x1, y1)))
            result[label] = {"length_m": round(path.length, 4),
                             "cells": len(path.cells),
                             "intersects_taught": path_intersects(path, taught)}
        except NoPath as exc:
            result[label] = {"no_path": str(exc)}
    return result


def cmd_eval(args) -> int:
    suite_dir = Path(args.suite)
    scenario_paths = sorted(suite_dir.glob("*.json"))
    if not scenario_paths:
        print(f"no scenario files in {suite_dir}", file=sys.stderr)
        return 1
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    reports = []
    for path in scenario_paths:
        scenario = load_scenario(path, seed=args.seed, dt=args.dt)
        report = run_scenario(scenario, out_dir=out / path.stem)
        reports.append(report)
        log.info("scenario %s: passed=%s", report.scenario, report.passed)
        if args.plan and report.borders:
            plan = _plan_report(scenario.prior_map_path, out / path.stem, args.plan)
            (out / path.stem / "plan.json").write_text(
                json.dumps(plan, sort_keys=True, indent=2) + "\n")

    with (out / "summary.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "border_length_m", "teaching_time_s",
                         "jaccard", "passed"])
        for r in reports:
            writer.writerow([r.scenario, f"{r.border_length:.4f}",
                             f"{r.teaching_time:.4f}",
                             "" if r.jaccard is None else f"{r.jaccard:.4f}",
                             r.passed])

    usable = [r for r in reports if r.passed and r.border_length > 0]
    fit_info: dict = {"n": len(usable)}
    if len(usable) >= 3:
        try:
            fit = fit_time_length(usable)
            fit_info.update(slope=fit.slope, intercept=fit.intercept,
                            r_squared=fit.r_squared)
        except DegenerateFit as exc:
            fit_info["error"] = str(exc)
    (out / "fit.json").write_text(json.dumps(fit_info, sort_keys=True, indent=2) + "\n")
    print(json.dumps(fit_info, sort_keys=True, indent=2))
    return 0 if all(r.passed for r in reports) else 2


def cmd_render(args) -> int:
    from PIL import Image
    import numpy as np

    from .camera import CameraPose
    from .detect import detect_laser_point
    from .scene import LaserSpot, render_frame
    from .simulate import Simulation

    scenario = load_scenario(args.scenario, seed=args.seed, dt=args.dt)
    sim = Simulation(scenario)
    sim.run(duration=min(args.time, scenario.duration))
    laser = scenario.laser_at(sim.t)
    spot = None
    if laser is not None:
        spot = LaserSpot(laser[0], laser[1], radius=scenario.laser_radius)
    cam_pose = CameraPose(sim.pose.x, sim.pose.y, sim.pose.theta, scenario.mount)
    frame = render_frame(scenario.scene.with_laser(spot), scenario.intrinsics, cam_pose)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    color = frame.color.copy()
    if args.annotate:
        pixel = detect_laser_point(frame, scenario.detection)
        if pixel is not None:
            px, py = int(round(pixel[0])), int(round(pixel[1]))
            color[max(0, py - 8):py + 9, px, :] = (0, 255, 0)
            color[py, max(0, px - 8):px + 9, :] = (0, 255, 0)
    stamp = f"t{args.time:07.2f}"
    Image.fromarray(color, mode="RGB").save(out / f"frame_{stamp}.png")
    depth_mm = np.clip(frame.depth * 1000.0, 0, 65535).astype(">u2")
    header = f"P5\n{frame.width} {frame.height}\n65535\n".encode("ascii")
    (out / f"depth_{stamp}.pgm").write_bytes(header + depth_mm.tobytes())
    print(f"wrote frame_{stamp}.png and depth_{stamp}.pgm to {out}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve

    serve(args.scenarios, host=args.host, port=args.port,
          ticks_per_call=args.headless_ticks_per_call)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="borderforge",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario headless")
    run.add_argument("scenario")
    run.add_argument("--out", default="out")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--dt", type=float, default=None)
    run.set_defaults(func=cmd_run)

    ev = sub.add_parser("eval", help="run a directory of scenarios and fit time vs length")
    ev.add_argument("suite")
    ev.add_argument("--out", default="out/eval")
    ev.add_argument("--seed", type=int, default=None)
    ev.add_argument("--dt", type=float, default=None)
    ev.add_argument("--plan", default=None, metavar="X0,Y0,X1,Y1",
                    help="also plan start->goal on each prior/posterior and "
                         "report keep-off intersections")
    ev.set_defaults(func=cmd_eval)

    rend = sub.add_parser("render", help="dump a camera frame from a scenario")
    rend.add_argument("scenario")
    rend.add_argument("--time", type=float, default=0.0)
    rend.add_argument("--out", default="out/frames")
    rend.add_argument("--seed", type=int, default=None)
    rend.add_argument("--dt", type=float, default=None)
    rend.add_argument("--annotate", action="store_true",
                      help="overlay the detected laser point")
    rend.set_defaults(func=cmd_render)

    srv = sub.add_parser("serve", help="serve live teaching sessions over WebSocket")
    srv.add_argument("scenarios", help="directory of scenario files to serve")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=8750)
    srv.add_argument("--headless-ticks-per-call", type=int, default=1,
                     help="simulation ticks advanced per scheduler callback")
    srv.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BorderforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
