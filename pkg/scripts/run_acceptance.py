"""Run acceptance criteria and write one JSON record per criterion."""
import argparse
import json

from planarperc import acceptance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--suite", default="all", choices=sorted(acceptance.SUITES))
    ap.add_argument("--seed", type=int, default=acceptance.DEFAULT_SEED)
    ap.add_argument("--out", default=None, help="JSON lines file")
    args = ap.parse_args()
    results = acceptance.run_suite(acceptance.SUITES[args.suite], args.seed, echo=print)
    if args.out:
        with open(args.out, "w") as fh:
            for r in results:
                fh.write(json.dumps(r.to_json(), sort_keys=True) + "\n")
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} passed" + (f"; failed {failed}" if failed else ""))
    raise SystemExit(4 if failed else 0)


if __name__ == "__main__":
    main()
