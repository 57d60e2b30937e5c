"""Analytic distribution times against the Monte Carlo chain simulation."""
import argparse

from cavityrep.cli import write_csv
from cavityrep.montecarlo import default_validation_configs, validate_report


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--distance", type=float, default=1000.0)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    rows = []
    for r in validate_report(default_validation_configs(args.distance), trials=args.trials, seed=args.seed):
        c = r.config
        rows.append([c.gate, c.architecture, c.n, c.j, r.analytic, r.mc_mean, r.mc_se, r.ratio, r.flagged()])
    write_csv(rows, ["gate", "architecture", "n", "j", "analytic_s", "mc_mean_s", "mc_se_s", "ratio", "flagged"], args.out)


if __name__ == "__main__":
    main()
