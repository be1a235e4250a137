"""Monte Carlo survival of the half-plane exploration across a p grid."""
import argparse

import numpy as np

from planarperc.halfplane import threshold_scan
from planarperc.partition import solve_cached
from planarperc.weights import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="crit-quad")
    ap.add_argument("--runs", type=int, default=10_000)
    ap.add_argument("--cap", type=int, default=10**6)
    ap.add_argument("--width", type=float, default=0.1)
    ap.add_argument("--points", type=int, default=9)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    s = solve_cached(preset(args.preset))
    grid = np.clip(np.linspace(s.p_c - args.width, s.p_c + args.width, args.points), 0.0, 0.999)
    print(f"p_c = {s.p_c:.6f}")
    for row in threshold_scan(s, grid, args.runs, args.cap, args.seed):
        flag = "  MONOTONE?" if row["monotone_violation"] else ""
        print(f"p={row['p']:.4f} drift={row['drift']:+.4f} survival={row['survival']:.4f}"
              f" +- {row['stderr']:.4f}{flag}")


if __name__ == "__main__":
    main()
