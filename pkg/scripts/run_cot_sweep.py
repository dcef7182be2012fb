#!/usr/bin/env python3
"""Reproduce the full energy-efficiency sweep.

Runs the 54-cell grid (forward/lateral/turn x 0.4/0.8/1.2 x footholds
0/0.08/0.16 x bennett/planar), writes sweep.csv, and prints the trend
summary used in the paper-style comparison.
"""

import argparse
import time
from pathlib import Path

import numpy as np

from orlsim.scenario import SweepGrid, sweep_experiment
from orlsim.serialize import sweep_to_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", type=Path, default=Path("out/sweep"))
    ap.add_argument("--duration", type=float, default=8.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=2)
    args = ap.parse_args()

    grid = SweepGrid(duration=args.duration, seed=args.seed)
    t0 = time.perf_counter()
    cells = sweep_experiment(grid, workers=args.workers)
    wall = time.perf_counter() - t0
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "sweep.csv"
    path.write_text(sweep_to_csv(cells, grid))
    print(f"{len(cells)} cells in {wall:.0f} s -> {path}")

    def val(motion, variant, off, speed):
        for c in cells:
            if (c.motion, c.variant, c.foothold_offset, c.target_speed) == (
                motion, variant, off, speed,
            ):
                return c.cot if c.status == "ok" else None

    print("\nforward COT by foothold offset (0 / 0.08 / 0.16):")
    for variant in grid.variants:
        for v in grid.speeds:
            row = [val("forward", variant, o, v) for o in grid.footholds]
            print(f"  {variant:8s} v={v}: " + "  ".join(
                "--" if x is None else f"{x:.3f}" for x in row))

    print("\nlateral COT bennett vs planar at 0.16 m:")
    for v in grid.speeds:
        b = val("lateral", "bennett", 0.16, v)
        p = val("lateral", "planar", 0.16, v)
        if b and p:
            print(f"  v={v}: {b:.3f} vs {p:.3f}  ({(p - b) / p * 100:.0f}% lower)")


if __name__ == "__main__":
    main()
