"""Finite-difference eigenvalues against the spectral solve as the grid is refined.

    python3 scripts/spectrum_convergence.py --n-max 5 --out spectrum_convergence.csv
"""
import argparse
import csv

from precanonical.poly import Poly
from precanonical.quantum import QuantumModel, eigensolve, fd_eigensolve


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=5)
    ap.add_argument("--quartic", type=float, default=0.0, help="add lambda y^4 to the free potential")
    ap.add_argument("--points", type=int, nargs="+", default=[125, 250, 500, 1000, 2000])
    ap.add_argument("--order", type=int, default=4, help="stencil order")
    ap.add_argument("--out", default="spectrum_convergence.csv")
    args = ap.parse_args()

    pot = None
    if args.quartic:
        pot = Poly.var("y[0]", 2) / 2 + Poly.var("y[0]", 4) * args.quartic
    model = QuantumModel(potential=pot)
    ref = eigensolve(model, args.n_max)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["points", "N", "chi_spectral", "chi_fd", "relative_error"])
        for pts in args.points:
            errs = []
            for N, (a, b) in enumerate(zip(ref, fd_eigensolve(model, args.n_max, pts, order=args.order))):
                errs.append(abs(a.chi - b.chi) / a.chi)
                w.writerow([pts, N, a.chi, b.chi, errs[-1]])
            print(f"points={pts}: worst relative error {max(errs):.3e}")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
