"""Experiment runner CLI.

    frogsim <experiment> [--config file.json] [--radius R] [--seed S]
                         [--replicas N] [--out DIR] [--workers W] [--dim D]
    frogsim report <out_dir> [--no-figures]

A run writes config.json, results.json, summary.json and the experiment's
CSV tables atomically into the output directory and exits 0 only when
every verdict passed. ``report`` prints one line per verdict and renders
figures next to the CSVs.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .experiments import EXPERIMENT_NAMES, RUNNERS, ConfigError, resolve_config
from .output import SCHEMA_VERSION, Verdict, atomic_write_text, canonical_json, config_hash, format_verdict_line, write_csv

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="frogsim", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")
    for name in EXPERIMENT_NAMES:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, default=None, help="JSON config file")
        p.add_argument("--radius", type=str, default=None,
                       help="interaction radius; a number, 'critical' or '<f>*critical'")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--replicas", type=int, default=None)
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None, help="replica worker processes")
        p.add_argument("--dim", type=int, default=None)
        p.add_argument("--box-side", type=float, default=None)
        p.add_argument("--t-max", type=float, default=None)
        p.add_argument("--dt-max", type=float, default=None)
        p.add_argument("--critical-radius-artifact", type=str, default=None,
                       help="summary.json of a critical-radius run, for radius 'critical'")
    rep = sub.add_parser("report", help="print the verdicts of a completed run")
    rep.add_argument("out_dir", type=Path)
    rep.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    return parser


def _overrides_from_args(args) -> dict:
    radius = args.radius
    if radius is not None:
        try:
            radius = float(radius)
        except ValueError:
            pass  # 'critical' forms resolve later
    over = dict(radius=radius, seed=args.seed, replicas=args.replicas, out_dir=args.out,
                workers=args.workers, dim=args.dim, box_side=args.box_side, t_max=args.t_max,
                dt_max=args.dt_max)
    if args.critical_radius_artifact:
        over["extra"] = {"critical_radius_artifact": args.critical_radius_artifact}
    return {k: v for k, v in over.items() if v is not None}


def run_experiment_cli(name: str, args) -> int:
    try:
        file_cfg = None
        if args.config is not None:
            file_cfg = json.loads(Path(args.config).read_text())
        cfg = resolve_config(name, file_cfg, _overrides_from_args(args))
    except (ConfigError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    t0 = time.monotonic()
    try:
        verdicts, tables, values = RUNNERS[name](cfg)
    except Exception as exc:  # noqa: BLE001 - runtime failures map to exit 1
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    wall = time.monotonic() - t0
    out_dir = Path(cfg.out_dir)
    write_artifacts(out_dir, cfg, verdicts, tables, values, wall)
    for v in verdicts:
        print(format_verdict_line(v))
    all_pass = all(v.passed for v in verdicts)
    print(f"{'ALL PASS' if all_pass else 'FAILURES PRESENT'}  ({wall:.1f}s)  -> {out_dir}")
    return EXIT_OK if all_pass else EXIT_RUNTIME


def write_artifacts(out_dir: Path, cfg, verdicts: list[Verdict], tables: dict, values: dict,
                    wall_time: float) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg_dict = cfg.as_dict()
    atomic_write_text(out_dir / "config.json", canonical_json(cfg_dict))
    for name, (header, rows) in tables.items():
        write_csv(out_dir / name, header, rows)
    results = {
        "schema_version": SCHEMA_VERSION,
        "experiment": cfg.experiment,
        "config": cfg_dict,
        "config_sha256": config_hash(cfg_dict),
        "verdicts": [v.row() for v in verdicts],
        "values": values,
        "all_passed": all(v.passed for v in verdicts),
    }
    atomic_write_text(out_dir / "results.json", canonical_json(results))
    # wall time is informational and the one field that varies between
    # reruns; everything else in summary.json matches results.json
    summary = dict(results)
    summary["wall_time_s"] = round(wall_time, 3)
    atomic_write_text(out_dir / "summary.json", canonical_json(summary))


def run_report(args) -> int:
    out_dir = Path(args.out_dir)
    summary_path = out_dir / "summary.json"
    if not summary_path.exists():
        print(f"no summary.json under {out_dir}", file=sys.stderr)
        return EXIT_CONFIG
    summary = json.loads(summary_path.read_text())
    for row in summary.get("verdicts", []):
        v = Verdict(name=row["name"], value=row["value"], target=row["target"],
                    passed=row["passed"], ci=tuple(row["ci"]) if row.get("ci") else None,
                    n=row.get("n"), extra=row.get("extra") or {})
        print(format_verdict_line(v))
    print(f"experiment: {summary.get('experiment')}  all_passed: {summary.get('all_passed')}")
    if not args.no_figures:
        from .figures import render_figures

        written = render_figures(out_dir)
        for path in written:
            print(f"figure: {path}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args, unknown = parser.parse_known_args(argv)
    if unknown:
        print(f"unrecognized arguments: {unknown}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    if args.command == "report":
        return run_report(args)
    return run_experiment_cli(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
