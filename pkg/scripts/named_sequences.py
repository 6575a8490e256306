#!/usr/bin/env python3
"""Verdicts of every classifier on the built-in deterministic sequences."""

import argparse

from quasimarkov.distributions import NAMED_SEQUENCES, named_sequence
from quasimarkov.empirical import HorizonSchedule, classify


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=100_000)
    p.add_argument("--eps", type=float, default=0.01)
    args = p.parse_args()
    h = HorizonSchedule.default(args.n, args.eps)
    print(f"N={args.n} eps={args.eps} checkpoints={h.checkpoints}")
    for name in sorted(NAMED_SEQUENCES):
        x = named_sequence(name, args.n)
        row = [f"{x.kind}: {classify(x, h).status}"]
        if x.kind != "finite":
            row.append(f"real-avg: {classify(x, h, averaged=True).status}")
        if x.kind == "nat":
            row.append(f"real: {classify(x.as_real(), h).status}")
        print(f"{name:<20} " + "  ".join(row))


if __name__ == "__main__":
    main()
