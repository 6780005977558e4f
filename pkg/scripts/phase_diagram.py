"""Classify a (theta1, theta2) grid and write CSV, plot data and boundaries.

    python3 scripts/phase_diagram.py --grid 64 --L 64 --out runs/phases

Reruns with the same settings resume from the CSV.
"""
import argparse
import os
from collections import Counter

import numpy as np

from nbwalk.phases import (
    ClassifyOptions,
    boundary_segments,
    phase_grid,
    write_boundaries,
    write_plot_data,
)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--grid", type=int, default=64)
    ap.add_argument("--L", type=int, default=64)
    ap.add_argument("--alpha", type=float, default=0.82, help="e^gamma")
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--out", default="runs/phases")
    args = ap.parse_args()

    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    grid = phase_grid(resolution=args.grid, gamma=float(np.log(args.alpha)),
                      opts=ClassifyOptions(L=args.L), out_csv=args.out + ".csv",
                      workers=args.workers)
    write_plot_data(args.out + "_plot.dat", grid)
    write_boundaries(args.out + "_boundaries.dat", boundary_segments(grid))
    for cls, n in sorted(Counter(pt.phase_class for row in grid for pt in row).items()):
        print(f"{cls:18s} {n}")


if __name__ == "__main__":
    main()
