#!/usr/bin/env python3
"""Write per-trial ECDF discrepancies as CSV for external plotting."""

import argparse
import sys

from quasimarkov.distributions import make_distribution
from quasimarkov.verify import TrialPlan, verify_ecdf_concentration


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--dist", default="uniform01")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ns", default="100,300,1000,3000")
    args = p.parse_args()
    ns = tuple(int(n) for n in args.ns.split(","))
    report = verify_ecdf_concentration(make_distribution(args.dist), TrialPlan(args.trials, seed=args.seed), ns)
    print(report.to_table(), file=sys.stderr)
    sys.stdout.write(report.to_csv())


if __name__ == "__main__":
    main()
