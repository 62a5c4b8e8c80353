"""Run the reference example suite and print one line per check.

    python3 scripts/run_examples.py [--out results/examples.json] [--tol 1e-6]
"""

import argparse
import json
import sys
import time

from slanthelix.verify import checks_to_dicts, example_suite, suite_passed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tol", type=float, default=1e-6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="optional JSON dump of all checks")
    args = ap.parse_args(argv)

    t0 = time.perf_counter()
    checks = example_suite(args.tol, args.seed)
    elapsed = time.perf_counter() - t0
    width = max(len(c.name) for c in checks)
    for c in checks:
        flag = ("ok" if c.passed else "FAIL") if c.kind == "check" else "note"
        line = f"{c.name:<{width}}  {flag:<4}  value={c.value:.6g}  target={c.target:.6g}"
        if c.detail:
            line += f"  [{c.detail}]"
        print(line)
    print(f"\n{sum(c.passed for c in checks if c.kind == 'check')} checks passed in {elapsed:.1f}s")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(checks_to_dicts(checks), fh, indent=2)
    return 0 if suite_passed(checks) else 1


if __name__ == "__main__":
    sys.exit(main())
