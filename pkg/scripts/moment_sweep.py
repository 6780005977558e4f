"""Normalised moments along theta1 for several step counts and orders,
with the kinks each sweep reports.

    python3 scripts/moment_sweep.py --out runs/moments
"""
import argparse
import os

import numpy as np

from nbwalk.moments import sweep_moments, write_csv
from nbwalk.walk import WalkParams


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--theta2", type=float, default=0.58, help="in units of pi")
    ap.add_argument("--alpha", type=float, default=0.82)
    ap.add_argument("--steps", type=int, nargs="+", default=[7, 20, 40, 80])
    ap.add_argument("--orders", type=float, nargs="+", default=[0.1, 1.0, 2.0])
    ap.add_argument("--out", default="runs/moments")
    args = ap.parse_args()

    os.makedirs(args.out, exist_ok=True)
    grid = np.arange(101) * 0.01 * np.pi
    base = WalkParams(0.0, args.theta2 * np.pi, float(np.log(args.alpha)), 0.0, 17)
    for N in args.steps:
        for l in args.orders:
            s = sweep_moments(base, grid, l, N)
            write_csv(os.path.join(args.out, f"N{N}_l{l:g}.csv"), s, {"N": N, "l": l})
            print(f"N={N:3d} l={l:<4g} kinks/pi:", np.round(np.array(s.kinks) / np.pi, 2))


if __name__ == "__main__":
    main()
