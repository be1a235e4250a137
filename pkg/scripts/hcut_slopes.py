"""Exact Hcut_k tables and their log-log slopes for a few weight sequences."""
import argparse

import numpy as np

from planarperc.partition import solve_cached
from planarperc.stats import fit_power_tail
from planarperc.walk_oracle import hcut_table, step_law
from planarperc.weights import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--presets", default="crit-quad,tuned:2.2")
    ap.add_argument("--kmax", type=int, default=4096)
    ap.add_argument("--lo", type=int, default=64)
    args = ap.parse_args()
    for name in args.presets.split(","):
        s = solve_cached(preset(name))
        for label, p in (("p_c", s.p_c), ("(p_c+1)/2", (s.p_c + 1) / 2)):
            h = hcut_table(step_law(s, p), args.kmax)
            k = np.arange(len(h))
            fit = fit_power_tail(list(zip(k[1:], h[1:])), (args.lo, args.kmax))
            local = " ".join(f"{x:+.3f}" for x in fit.dyadic_slopes)
            print(f"{name:>14} p={label:<10} slope {fit.slope:+.4f} +- {fit.stderr:.4f}  dyadic [{local}]")


if __name__ == "__main__":
    main()
