"""Leaf-count law of Galton-Watson trees with offspring law mu."""
import argparse

from planarperc.gw_trees import pointed_exponent, volume_tail
from planarperc.partition import solve_cached
from planarperc.weights import classify, preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="crit-quad")
    ap.add_argument("--runs", type=int, default=10**6)
    ap.add_argument("--node-cap", type=int, default=10**7)
    ap.add_argument("--lo", type=float, default=2**5)
    ap.add_argument("--hi", type=float, default=2**17)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    s = solve_cached(preset(args.preset))
    alpha = classify(s).alpha
    r = volume_tail(s.mu, args.runs, (args.lo, args.hi), args.seed, args.node_cap)
    print(f"alpha {alpha}  censored {r.censored_fraction:.2e}")
    print(f"pointed   slope {r.pointed.slope:+.4f} +- {r.pointed.stderr:.4f}  target {pointed_exponent(alpha):+.4f}")
    print(f"unpointed slope {r.unpointed.slope:+.4f} +- {r.unpointed.stderr:.4f}")


if __name__ == "__main__":
    main()
