#!/usr/bin/env python3
"""Sweep the laser detector's thresholds over a seeded frame corpus.

Prints detection rate and distractor false-positive counts per parameter
value, to sanity-check that the shipped defaults sit on a plateau rather
than a knife edge. Purely exploratory; the shipped defaults live in
DetectionParams.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from borderforge.camera import CameraIntrinsics, CameraMount, CameraPose
from borderforge.detect import DetectionParams, detect_laser_point
from borderforge.scene import (Distractor, FloorTexture, LaserSpot, SceneSpec,
                               render_frame)

DISTRACTOR_KINDS = ("matte_rect", "specular_dot", "big_blob", "strip")


def spot_frames(n: int, intr, mount):
    rng = np.random.default_rng(11)
    for i in range(n):
        pose = CameraPose(0.0, 0.0, 0.0, mount)
        d = float(rng.uniform(0.5, 3.0))
        off = float(rng.uniform(-0.3, 0.3))
        scene = SceneSpec(floor=FloorTexture(seed=i), laser=LaserSpot(d, off))
        yield render_frame(scene, intr, pose)


def distractor_frames(n: int, intr, mount):
    rng = np.random.default_rng(13)
    for i in range(n):
        pose = CameraPose(0.0, 0.0, 0.0, mount)
        kind = DISTRACTOR_KINDS[i % 4]
        d = float(rng.uniform(0.7, 2.5))
        off = float(rng.uniform(-0.3, 0.3))
        if kind == "matte_rect":
            dis = Distractor(kind, d - 0.2, off - 0.2, d + 0.2, off + 0.2,
                             color=(140, 30, 30))
        elif kind == "strip":
            dis = Distractor(kind, d, off, d + 0.12, off + 0.03, size=0.004,
                             color=(255, 20, 20))
        elif kind == "big_blob":
            dis = Distractor(kind, d, off, size=0.12, color=(255, 20, 20))
        else:
            dis = Distractor(kind, d, off, size=0.012)
        scene = SceneSpec(floor=FloorTexture(seed=7000 + i), distractors=(dis,))
        yield render_frame(scene, intr, pose)


def sweep(field: str, values, n_spot: int, n_distr: int):
    intr = CameraIntrinsics().scaled(0.5)
    mount = CameraMount()
    spots = list(spot_frames(n_spot, intr, mount))
    distractors = list(distractor_frames(n_distr, intr, mount))
    print(f"{field:>18}  rate   false_pos")
    for value in values:
        params = dataclasses.replace(DetectionParams(), **{field: value})
        hits = sum(detect_laser_point(f, params) is not None for f in spots)
        fps = sum(detect_laser_point(f, params) is not None for f in distractors)
        print(f"{value!s:>18}  {hits / n_spot:5.3f}  {fps}/{n_distr}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--frames", type=int, default=200)
    parser.add_argument("--distractors", type=int, default=120)
    args = parser.parse_args()
    sweep("delta", [20.0, 30.0, 40.0, 50.0, 60.0], args.frames, args.distractors)
    sweep("circularity_min", [0.4, 0.5, 0.6, 0.7], args.frames, args.distractors)
    sweep("center_v_min", [160, 180, 200, 220], args.frames, args.distractors)
    sweep("min_saturation", [50, 65, 80, 95], args.frames, args.distractors)


if __name__ == "__main__":
    main()
