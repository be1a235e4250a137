"""Exact supercritical survival P(tau > h) on dyadic horizons and its increments."""
import argparse

from planarperc.partition import solve_cached
from planarperc.walk_oracle import step_law, survival_curve
from planarperc.weights import preset


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--preset", default="crit-quad")
    ap.add_argument("--dp", type=float, default=0.05, help="offset above p_c")
    ap.add_argument("--log2-horizon", type=int, default=13)
    args = ap.parse_args()
    s = solve_cached(preset(args.preset))
    curve, lost = survival_curve(step_law(s, s.p_c + args.dp), 2**args.log2_horizon)
    prev = prev_inc = None
    for j in range(6, args.log2_horizon + 1):
        v = curve[2**j]
        inc = None if prev is None else prev - v
        ratio = "" if inc is None or prev_inc is None else f"  ratio {inc / prev_inc:.3f}"
        print(f"h=2^{j:<2} P(tau>h)={v:.6f}" + ("" if inc is None else f"  drop {inc:.2e}") + ratio)
        prev, prev_inc = v, inc
    print(f"lost mass {lost:.1e}")


if __name__ == "__main__":
    main()
