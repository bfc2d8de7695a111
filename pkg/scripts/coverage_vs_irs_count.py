#!/usr/bin/env python3
"""Covered-user ratio versus the number of deployed surfaces (CSV).

Thin wrapper over the coverage runner; without --config it uses the
canned wide-area study (200 users, J = 1..5, 20/30 dB thresholds).
Equivalent to `irsplan coverage`.  Exits 3 when a non-greedy solver hit
its node budget and the reported ratios are incumbents.
"""

import argparse
import dataclasses
import sys

from irsplan.cli import write_csv
from irsplan.config import experiment_preset, load_config
from irsplan.runners import run_coverage


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "-c", "--config", help="YAML configuration (default: widearea_coverage preset)"
    )
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("-o", "--out", default="-", help="output CSV ('-' = stdout)")
    args = parser.parse_args(argv)
    cfg = (
        load_config(args.config) if args.config else experiment_preset("widearea_coverage")
    )
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    result = run_coverage(cfg)
    meta = result["meta"] | {
        "num_spots": result["num_spots"],
        "num_ues": result["num_ues"],
    }
    write_csv(args.out, meta, result["rows"])
    return 3 if result["budget_exhausted"] else 0


if __name__ == "__main__":
    sys.exit(main())
