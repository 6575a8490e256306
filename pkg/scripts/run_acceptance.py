#!/usr/bin/env python3
"""Print one pass/fail line per acceptance criterion; exit 1 if any fails."""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from test_acceptance import CRITERIA, RESULTS, record  # noqa: E402


def main() -> int:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("criteria", nargs="*", choices=sorted(CRITERIA, key=int), help="subset to run (default: all)")
    args = p.parse_args()
    for key in args.criteria or sorted(CRITERIA, key=int):
        record(key, *CRITERIA[key]())
    return 0 if all(ok for ok, _ in RESULTS.values()) else 1


if __name__ == "__main__":
    sys.exit(main())
