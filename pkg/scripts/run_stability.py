#!/usr/bin/env python3
"""Noise stability sweep: median recovery error vs measurement SNR.

The noiseless (inf) point doubles as the exact-recovery sanity check: its
median error should sit at solver tolerance, orders below the noisy points.
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
    ap.add_argument("--rank", type=int, default=4)
    ap.add_argument("--eta", type=float, default=3.5)
    args = ap.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return main([
        "stability", "--scale", args.scale, "--seed", str(args.seed),
        "--threads", str(args.threads), "--rank", str(args.rank),
        "--eta", str(args.eta), "--grid", "10,20,30,40,50,inf",
        "--rho", "5", "--max-iters", "8000",
        "--out", str(out / "stability.csv"),
    ])


if __name__ == "__main__":
    sys.exit(run())
