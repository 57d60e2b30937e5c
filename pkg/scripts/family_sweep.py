"""Best normalized key rate of each scheme family along distance or cooperativity.

Distance axis at fixed cooperativity, or cooperativity axis at fixed distance.
"""
import argparse

from cavityrep.cli import SWEEP_COLUMNS, cell_values, write_csv
from cavityrep.optimize import FAMILIES, SweepSpec, optimize_grid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--axis", choices=("distance", "cooperativity"), default="distance")
    ap.add_argument("--distances", type=float, nargs="+", default=[100, 200, 400, 600, 800, 1000])
    ap.add_argument("--cooperativities", type=float, nargs="+", default=[100.0])
    ap.add_argument("--qubits", type=int, choices=(2, 4), default=2)
    ap.add_argument("--families", nargs="+", default=list(FAMILIES))
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    if args.axis == "cooperativity" and args.distances == ap.get_default("distances"):
        args.distances = [1000.0]
        if args.cooperativities == ap.get_default("cooperativities"):
            args.cooperativities = [10, 20, 30, 40, 60, 100, 150, 200, 300, 500, 1000]
    spec = SweepSpec(
        distances=tuple(args.distances),
        cooperativities=tuple(float(c) for c in args.cooperativities),
        qubits_per_station=args.qubits,
        families=tuple(args.families),
    )
    rows = []
    for rec in optimize_grid(spec, max_workers=args.workers):
        rows.append([rec.distance, rec.cooperativity, rec.family] + cell_values(rec.config, rec.report, rec.T, rec.eps_sq))
    write_csv(rows, ["distance_km", "cooperativity", "family"] + SWEEP_COLUMNS, args.out)


if __name__ == "__main__":
    main()
