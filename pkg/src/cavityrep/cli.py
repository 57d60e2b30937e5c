"""Command line interface: ``cavityrep {rate,sweep,compare,validate}``."""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

from .config import RunConfig
from .errors import ConsistencyError, ParameterError, RepeaterError
from .montecarlo import default_validation_configs, validate_report
from .optimize import SweepSpec, compare_schemes, optimize_grid, optimize_inner
from .secret import evaluate

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CONSISTENCY = 3

SWEEP_COLUMNS = [
    "scheme",
    "gate",
    "architecture",
    "n",
    "j",
    "variant",
    "T_s",
    "eps_sq",
    "fidelity",
    "dist_rate_hz",
    "secret_fraction",
    "secret_rate_hz",
    "normalized_rate_hz_per_station",
]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def write_csv(rows: list[list], header: list[str], out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cell_values(config, report, T, eps_sq) -> list:
    return [
        config.scheme,
        config.gate,
        config.architecture,
        config.n,
        config.j,
        config.variant,
        T,
        eps_sq,
        report.final_fidelity,
        report.distribution_rate,
        report.secret_fraction,
        report.secret_key_rate,
        report.normalized_rate,
    ]


def _same_design(a, b) -> bool:
    return (a.scheme, a.n, a.j, a.variant, a.architecture) == (b.scheme, b.n, b.j, b.variant, b.architecture)


def _load(args) -> RunConfig:
    cfg = RunConfig.load(args.config).override(args.override)
    if args.seed is not None:
        cfg.data["seed"] = args.seed
    return cfg


def cmd_rate(args) -> int:
    cfg = _load(args)
    config = cfg.repeater_config()
    if cfg.data["rate"]["optimize"] and config.T is None:
        inner = optimize_inner(config)
        config = replace(config, T=inner.T, eps_sq=inner.eps_sq)
    report, result = evaluate(config)
    t = result.timing
    block = {
        "scheme": config.scheme,
        "gate": config.gate,
        "architecture": config.architecture,
        "n": config.n,
        "j": config.j,
        "variant": config.variant,
        "distance_km": config.L_total,
        "cooperativity": config.link.cooperativity,
        "T_s": config.window(),
        "eps_sq": config.eps_sq,
        "generation_success_prob": result.attempt.success_prob,
        "fidelity": report.final_fidelity,
        "tau_link_s": t.tau_link,
        "tau_swap_total_s": t.tau_swap_total,
        "distribution_time_s": t.distribution_time,
        "level_times_s": list(t.level_times),
        "dist_rate_hz": report.distribution_rate,
        "secret_fraction": report.secret_fraction,
        "secret_rate_hz": report.secret_key_rate,
        "stations": report.stations,
        "normalized_rate_hz_per_station": report.normalized_rate,
    }
    for key, value in block.items():
        shown = " ".join(fmt(v) for v in value) if isinstance(value, list) else fmt(value)
        print(f"{key} = {shown}")
    json_path = args.out or cfg.data["output"]["json_path"]
    if json_path:
        with open(json_path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(block, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def _spec_for_axis(spec: SweepSpec, axis: str) -> SweepSpec:
    if axis == "distance" and len(spec.cooperativities) != 1:
        raise ParameterError("a distance sweep needs exactly one cooperativity")
    if axis == "cooperativity" and len(spec.distances) != 1:
        raise ParameterError("a cooperativity sweep needs exactly one distance")
    return spec


def cmd_sweep(args) -> int:
    cfg = _load(args)
    spec = _spec_for_axis(cfg.sweep_spec(), args.axis)
    records = optimize_grid(spec, max_workers=cfg.workers)
    axis_col = "distance_km" if args.axis == "distance" else "cooperativity"
    header = [axis_col, "family"] + SWEEP_COLUMNS
    rows = []
    for rec in records:
        axis_value = rec.distance if args.axis == "distance" else rec.cooperativity
        if args.all_cells:
            for cell in rec.cells:
                inner = cell.inner
                rows.append(
                    [axis_value, rec.family]
                    + cell_values(cell.config, inner.report, inner.T, inner.eps_sq)
                    + [_same_design(cell.config, rec.config)]
                )
        else:
            rows.append([axis_value, rec.family] + cell_values(rec.config, rec.report, rec.T, rec.eps_sq))
    if args.all_cells:
        header = header + ["winner"]
    write_csv(rows, header, args.out or cfg.data["output"]["csv_path"])
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load(args)
    spec = cfg.sweep_spec()
    ranking = compare_schemes(spec, max_workers=cfg.workers)
    header = ["distance_km", "cooperativity", "rank", "family"] + SWEEP_COLUMNS
    rows = [
        [r.distance, r.cooperativity, r.rank, r.family]
        + cell_values(r.record.config, r.record.report, r.record.T, r.record.eps_sq)
        for r in ranking
    ]
    write_csv(rows, header, args.out or cfg.data["output"]["csv_path"])
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = _load(args)
    v = cfg.data["validation"]
    trials = int(v["trials"])
    low, high = (float(x) for x in v["band"])
    configs = default_validation_configs(float(v["distance_km"]), cfg.link_params())
    rows_out = validate_report(configs, trials=trials, seed=cfg.seed, max_workers=cfg.workers)
    header = ["gate", "architecture", "n", "j", "analytic_s", "mc_mean_s", "mc_se_s", "ratio", "flagged"]
    rows = [
        [r.config.gate, r.config.architecture, r.config.n, r.config.j, r.analytic, r.mc_mean, r.mc_se, r.ratio,
         r.flagged(low, high)]
        for r in rows_out
    ]
    write_csv(rows, header, args.out or cfg.data["output"]["csv_path"])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cavityrep", description="Secret key rates of cavity-based quantum repeaters")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output path (CSV, or JSON for 'rate')")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                        help="dotted config key, e.g. link.cooperativity=1000 (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("rate", parents=[common], help="evaluate one repeater configuration")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("sweep", parents=[common], help="optimize every family along one axis")
    p.add_argument("--axis", choices=("distance", "cooperativity"), default="distance")
    p.add_argument("--all-cells", action="store_true", help="emit every evaluated design, not only the winners")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", parents=[common], help="rank families per grid point")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("validate", parents=[common], help="analytic times against Monte Carlo")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ParameterError, RepeaterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
