"""Ratio of composed to functional vacuum coefficients over a k range.

    python3 scripts/vacuum_sweep.py --band 0.1 --points 201 --out vacuum_sweep.csv
"""
import argparse
import csv

import numpy as np

from precanonical.vacuum import CutoffConfig, compare, kappa_from_cutoff, long_wave_deviation


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--band", type=float, default=0.1, help="largest hbar k / m")
    ap.add_argument("--points", type=int, default=201)
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--kappa-factor", type=float, default=1.0, help="multiplies the identified kappa")
    ap.add_argument("--out", default="vacuum_sweep.csv")
    args = ap.parse_args()

    cfg = CutoffConfig(n=args.n)
    kappa = args.kappa_factor * kappa_from_cutoff(cfg)
    ks = np.linspace(0, args.band * cfg.m / cfg.hbar, args.points)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "ratio", "deviation", "leading_order"])
        for r in compare(cfg, ks, kappa):
            w.writerow([r.k, r.ratio, 1 - r.ratio, long_wave_deviation(cfg, r.k)])
    print(f"wrote {args.points} rows to {args.out}")


if __name__ == "__main__":
    main()
