#!/usr/bin/env python3
"""Single-link ergodic rate versus AP-surface distance (CSV).

Thin wrapper over the link-sweep runner; without --config it uses the
canned sweep study (eight distances, six variants, 10000 fading draws).
Equivalent to `irsplan link-sweep`.
"""

import argparse
import dataclasses
import sys

from irsplan.cli import write_csv
from irsplan.config import experiment_preset, load_config
from irsplan.runners import run_link_sweep


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-c", "--config", help="YAML configuration (default: link_sweep preset)")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("-o", "--out", default="-", help="output CSV ('-' = stdout)")
    args = parser.parse_args(argv)
    cfg = load_config(args.config) if args.config else experiment_preset("link_sweep")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    result = run_link_sweep(cfg)
    write_csv(args.out, result["meta"], result["rows"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
