#!/usr/bin/env python3
"""Mean greedy SE over the (gamma1, gamma2) grid; writes CSV + summary JSON.

Full-size channels (5 users, 144x16, 50 rays) take a few seconds per 100
realizations; pass --realizations 10 for a quick look.  The summary flags a
model-mismatch observation when the argmax lands more than one grid step
from the (0.6, 0.6) reference cell.
"""

import argparse
import json
from pathlib import Path

from svbeam.harness import GAMMA_HEADER, ExperimentConfig, sweep_gamma, write_csv


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--realizations", type=int, default=100)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=".")
    args = ap.parse_args()

    cfg = ExperimentConfig.from_dict({
        "channel": {"num_users": 5, "n_t": 144, "n_r": 16, "num_paths": 50},
        "selection": {"n_s": 2, "r_sel": 4, "gamma": 0.6},
        "link": {"snr_db": 25.0},
        "run": {"realizations": args.realizations, "seed": args.seed,
                "algorithms": ["g-iosvb"]},
    })
    rows, summary = sweep_gamma(cfg)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    path = write_csv(out / "gamma_sweep.csv", GAMMA_HEADER, rows)
    (out / "gamma_sweep_summary.json").write_text(json.dumps(summary, indent=1) + "\n")
    print(f"wrote {path}")
    print(f"argmax ({summary['argmax_gamma1']}, {summary['argmax_gamma2']}) "
          f"mean SE {summary['max_mean_se']:.3f}")
    if summary["model_mismatch"]:
        print("note: argmax more than one step from the (0.6, 0.6) reference cell "
              "(model-mismatch observation)")


if __name__ == "__main__":
    main()
