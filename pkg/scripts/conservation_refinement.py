"""Grid-refinement study of the conservation law for a two-mode superposition.

    python3 scripts/conservation_refinement.py --levels 5 --out conservation.csv
"""
import argparse
import csv

from precanonical.clifford import Metric
from precanonical.quantum import ModeSuperposition, QuantumModel, assemble_mode, conservation_residual


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=2, help="spacetime dimension")
    ap.add_argument("--k", type=float, default=0.8)
    ap.add_argument("--base-points", type=int, default=11)
    ap.add_argument("--levels", type=int, default=4)
    ap.add_argument("--out", default="conservation.csv")
    args = ap.parse_args()

    model = QuantumModel(Metric(args.n))
    k1 = [args.k] + [0.0] * (args.n - 2)
    k2 = [-0.5 * args.k] + [0.3] * (args.n - 2)
    Psi = ModeSuperposition.single(assemble_mode(model, 0, k1)) + ModeSuperposition.single(
        assemble_mode(model, 1, k2), 0.7j
    )
    lows = (0.0,) * args.n + (-1.0,)
    highs = (1.0,) * args.n + (1.0,)
    study = conservation_residual(model, Psi, lows, highs, args.base_points, args.levels)
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["grid", "residual", "order"])
        for row in study.to_json():
            w.writerow([row["grid"], row["residual"], row["order"]])
            print(row)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
