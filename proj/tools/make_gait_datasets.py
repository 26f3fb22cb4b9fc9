#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Builds the bundled synthetic gait cycles in data/.

Hip and knee angles are periodic cubic splines through textbook sagittal-plane
gait landmarks. During stance the ankle is derived from a prescribed foot
pitch (toe-up positive) so heel strike, flat foot, heel-off and push-off land
where they do in normal walking; in swing the ankle follows its own spline.
The toe-slap variant keeps hip and knee and lets the forefoot drop to the
ground right after heel strike instead of being lowered gradually.
"""
import argparse
import pathlib

import numpy as np
from scipy.interpolate import CubicSpline

HIP = [(0, 30), (10, 27), (30, 10), (50, -10), (56, -9), (62, 0), (75, 25), (87, 34)]
KNEE = [(0, 3), (15, 18), (40, 5), (50, 10), (60, 38), (72, 62), (85, 35), (95, 5)]
ANKLE_SWING = [(0, 0), (7, -5), (50, 10), (60, -15), (65, -17), (72, -8), (80, -2), (88, 0)]
PITCH_HEALTHY = [(0, 22), (5, 15), (10, 9), (15, 5), (20, 1), (25, 0), (40, 0), (45, -2),
                 (50, -10), (55, -25)]
PITCH_TOE_SLAP = [(0, 22), (5, 2), (10, 0), (40, 0), (45, -2), (50, -10), (55, -25)]
STANCE_END = 57.5


def periodic(knots, pct):
    x = np.array([k for k, _ in knots] + [100.0])
    y = np.array([v for _, v in knots] + [knots[0][1]])
    return CubicSpline(x, y, bc_type="periodic")(pct)


def build(pitch, n):
    pct = np.arange(n) * 100.0 / n
    hip = periodic(HIP, pct)
    knee = periodic(KNEE, pct)
    psi = np.interp(pct, [a for a, _ in pitch], [b for _, b in pitch])
    ankle = np.where(pct < STANCE_END, psi - (hip - knee), periodic(ANKLE_SWING, pct))
    return pct, hip, knee, ankle


def write(path, cols):
    with open(path, "w") as f:
        f.write("cycle_pct,hip_deg,knee_deg,ankle_deg\n")
        for row in zip(*cols):
            f.write(",".join(f"{v:.6g}" if v != 0 else "0" for v in row) + "\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(pathlib.Path(__file__).resolve().parent.parent / "data"))
    ap.add_argument("--samples", type=int, default=20)
    a = ap.parse_args()
    out = pathlib.Path(a.out)
    out.mkdir(parents=True, exist_ok=True)
    write(out / "healthy_gait.csv", build(PITCH_HEALTHY, a.samples))
    write(out / "toe_slap_gait.csv", build(PITCH_TOE_SLAP, a.samples))


if __name__ == "__main__":
    main()
