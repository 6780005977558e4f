"""Inside and outside GBC loops as delta shrinks, against the open-chain circle.

    python3 scripts/gbz_collapse.py --L 128 --out runs/gbz.csv
"""
import argparse
import os

import numpy as np

from nbwalk.gbz import build_contours, crossover_delta, obc_radius, write_csv
from nbwalk.walk import WalkParams


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--theta1", type=float, default=0.6, help="in units of pi")
    ap.add_argument("--theta2", type=float, default=0.58, help="in units of pi")
    ap.add_argument("--alpha", type=float, default=0.82)
    ap.add_argument("--L", type=int, default=128)
    ap.add_argument("--out", default="runs/gbz.csv")
    args = ap.parse_args()

    p = WalkParams(args.theta1 * np.pi, args.theta2 * np.pi, float(np.log(args.alpha)),
                   0.0, args.L)
    dc = crossover_delta(p)
    deltas = [1e-1, 1e-2, 1e-3] + [dc * f for f in (1e1, 1.0, 1e-1, 1e-2, 1e-3)]
    print(f"r_obc = {obc_radius(p):.12f}, crossover delta = {dc:.3e}")
    contours = []
    for d in deltas:
        inside, outside = build_contours(p.replace(delta=d))
        contours += [inside, outside]
        print(f"delta={d:9.3e}  inside: fit {inside.radius_fit:.5f} dev {inside.obc_deviation:.5f}"
              f"  outside: fit {outside.radius_fit:.5f} dev {outside.obc_deviation:.5f}")
    os.makedirs(os.path.dirname(args.out) or ".", exist_ok=True)
    write_csv(args.out, contours, {"L": args.L, "deltas": deltas})


if __name__ == "__main__":
    main()
