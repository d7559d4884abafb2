#!/usr/bin/env python3
"""Print the search-size table: exhaustive vs greedy scan counts and ratios.

Usage: python3 scripts/iteration_table.py [--users 5] [--r-sel 3,4,5,6] [--n-s 2,3,4,5,6]
"""

import argparse

from svbeam.harness import ITERATIONS_HEADER, report_iterations


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--users", type=int, default=5)
    ap.add_argument("--r-sel", default="3,4,5,6")
    ap.add_argument("--n-s", default="2,3,4,5,6")
    args = ap.parse_args()

    rows = report_iterations(
        [int(x) for x in args.r_sel.split(",")],
        [int(x) for x in args.n_s.split(",")],
        args.users,
    )
    print(ITERATIONS_HEADER)
    for row in rows:
        print(",".join(str(x) for x in row))


if __name__ == "__main__":
    main()
