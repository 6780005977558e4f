"""Kink recovery and the low-confidence flag versus photon budget.

    python3 scripts/shot_noise_scan.py --seeds 10
"""
import argparse

import numpy as np

from nbwalk.errors import InsufficientStatisticsError
from nbwalk.expsim import ExperimentConfig, noisy_sweep
from nbwalk.moments import sweep_moments
from nbwalk.walk import WalkParams


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=7)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--budgets", type=float, nargs="+", default=[1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e9])
    args = ap.parse_args()

    grid = np.arange(101) * 0.01 * np.pi
    base = WalkParams(0.0, 0.58 * np.pi, float(np.log(0.82)), 0.0, 17)
    clean = np.array(sweep_moments(base, grid, 0.1, args.steps).kinks)
    print("noiseless kinks/pi:", np.round(clean / np.pi, 2))
    for photons in args.budgets:
        hits = flagged = 0
        for seed in range(args.seeds):
            try:
                run = noisy_sweep(base, grid, ExperimentConfig(photons, rng_seed=seed), args.steps)
            except InsufficientStatisticsError as exc:
                print(f"{photons:8.0e}: {exc}")
                break
            k = np.array(run.series.kinks)
            hits += k.size == clean.size and np.all(np.abs(k - clean) <= 0.03 * np.pi)
            flagged += run.low_confidence
        else:
            print(f"{photons:8.0e}: kinks recovered {hits}/{args.seeds}, "
                  f"low-confidence {flagged}/{args.seeds}")


if __name__ == "__main__":
    main()
