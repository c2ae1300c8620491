#!/usr/bin/env python3
"""Architecture comparison: mask vs demodulator, incoherent vs spike inputs.

Plain cells sample at the nominal rate; preprocessed cells run the
universal (mixer + filter) front end at twice the rate, which is what it
takes to serve ensembles the plain architectures cannot see.
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
    ap.add_argument("--rank", type=int, default=3)
    ap.add_argument("--eta", type=float, default=4.0)
    ap.add_argument("--support", type=int, default=3)
    args = ap.parse_args(argv)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return main([
        "arch-compare", "--scale", args.scale, "--seed", str(args.seed),
        "--threads", str(args.threads), "--rank", str(args.rank),
        "--eta", str(args.eta), "--support", str(args.support),
        "--rho", "20", "--max-iters", "20000",
        "--out", str(out / "arch_compare.csv"),
    ])


if __name__ == "__main__":
    sys.exit(run())
