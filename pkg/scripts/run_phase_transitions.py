#!/usr/bin/env python3
"""Minimal-rate phase transitions along the rank axis and the channel axis.

Writes results/phase_rank.csv and results/phase_channels.csv plus companion
plot scripts.  Desk scale finishes in minutes on a laptop; --scale paper is
an overnight run.
"""
import argparse
import sys
from pathlib import Path

from ensamp.cli import main


def run(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", default="desk", choices=("desk", "paper"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=4)
    ap.add_argument("--out-dir", default="results")
    ap.add_argument("--variant", default="demodulator")
    args = ap.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    common = ["--scale", args.scale, "--seed", str(args.seed),
              "--threads", str(args.threads), "--variant", args.variant]
    rc = main(["phase-rank", "--grid", "1,2,3,4", *common,
               "--out", str(out / "phase_rank.csv")])
    rc |= main(["phase-channels", "--grid", "8,16,32", "--rank", "2", *common,
                "--out", str(out / "phase_channels.csv")])
    return rc


if __name__ == "__main__":
    sys.exit(run())
