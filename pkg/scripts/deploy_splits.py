#!/usr/bin/env python3
"""Deployment plans for element-budget splits on a street scene (JSON).

Thin wrapper over the deployment runner; without --config it uses the
canned 1024-element split study (k = 1, 2, 4 surfaces on the medium
scene).  Equivalent to `irsplan deploy`.  Exits 3 when a non-greedy
solver hit its node budget and the reported plans are incumbents.
"""

import argparse
import dataclasses
import sys

from irsplan.cli import write_json
from irsplan.config import experiment_preset, load_config
from irsplan.runners import run_deployment


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-c", "--config", help="YAML configuration (default: split_1024 preset)")
    parser.add_argument("--seed", type=int, default=None, help="override the master seed")
    parser.add_argument("-o", "--out", default="-", help="output JSON ('-' = stdout)")
    args = parser.parse_args(argv)
    cfg = load_config(args.config) if args.config else experiment_preset("split_1024")
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    result = run_deployment(cfg)
    write_json(args.out, result)
    return 3 if result["budget_exhausted"] else 0


if __name__ == "__main__":
    sys.exit(main())
