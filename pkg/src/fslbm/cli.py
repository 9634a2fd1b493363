"""Command-line driver: single runs, convergence studies, dam-break comparisons.

Exit codes: 0 on success, 2 for configuration problems, 3 when a run
diverges, 4 for I/O failures.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, RunConfig, parse_config
from .engine import FREE_SURFACE_RULES, DivergenceError
from .io_vtk import write_snapshot
from .oracles import observed_order
from .scenarios import (error_csv_rows, format_order, run_channel_resolution,
                        run_dam_break_rule, run_plate_study, write_error_csv)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_IO = 4


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fslbm", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    commands = (
        ("run", "single run at the coarsest configured resolution"),
        ("study", "full resolution sweep with observed convergence orders"),
        ("dam-break", "run full and simplified rule variants of a dam break"),
    )
    for name, blurb in commands:
        q = sub.add_parser(name, help=blurb)
        q.add_argument("config", help="path to a key = value config file")
        q.add_argument("--rule", choices=FREE_SURFACE_RULES,
                       help="override the free-surface rule")
        q.add_argument("--out", help="output directory")
        q.add_argument("--snapshots-every", type=int, default=None, metavar="N",
                       help="write snap_<step>.vtk every N steps (dam break) "
                            "or once per finished run (channels)")
        q.add_argument("--quiet", action="store_true",
                       help="suppress progress output")
    return p


def _apply_flags(args, sc, cfg: RunConfig) -> RunConfig:
    if args.rule:
        sc = replace(sc, rule=args.rule)
        cfg = replace(cfg, rule=args.rule)
    if args.out:
        cfg = replace(cfg, out_dir=args.out)
    if args.snapshots_every is not None:
        cfg = replace(cfg, snapshots_every=args.snapshots_every)
    if args.quiet:
        cfg = replace(cfg, quiet=True)
    return replace(cfg, scenario=sc)


def _say(cfg: RunConfig, msg: str):
    if not cfg.quiet:
        print(msg)


def _channel_snapshot(solver, path):
    inner = (slice(1, -1),) * 3
    write_snapshot(solver.f[inner], solver.flags[inner],
                   solver.active[inner].astype(float), path, solver.params)


def _run_channels(cfg: RunConfig, resolutions):
    sc = cfg.scenario
    out = Path(cfg.out_dir)
    reports = []
    for dx in resolutions:
        report, steps, solver = run_channel_resolution(sc, dx)
        reports.append(report)
        _say(cfg, f"{sc.name} rule={sc.rule} dx={dx:g}: L2={report.L2:.6e} "
                  f"Linf={report.Linf:.6e} ({steps} steps)")
        if cfg.snapshots_every:
            sdir = out / f"dx{dx:g}"
            sdir.mkdir(parents=True, exist_ok=True)
            _channel_snapshot(solver, sdir / f"snap_{steps}.vtk")
    if len(reports) >= 3:
        order = observed_order(reports)
        for r in reports:
            r.observed_order = order
        _say(cfg, f"{sc.name} rule={sc.rule}: observed order "
                  f"{format_order(order)}")
    return reports


def _plate_rows(cfg: RunConfig, sc):
    rows = []
    for T, reports in run_plate_study(sc).items():
        for r in reports:
            _say(cfg, f"{sc.name} T={T:g} dx={r.resolution:g}: eps={r.L2:.6e}")
        if len(reports) >= 3:
            _say(cfg, f"{sc.name} T={T:g}: observed order "
                      f"{format_order(reports[0].observed_order)}")
        rows.extend(error_csv_rows(f"{sc.name}-T{T:g}", sc.rule, reports))
    return rows


def _write_errors(cfg: RunConfig, rows):
    path = Path(cfg.out_dir) / "errors.csv"
    write_error_csv(path, rows)
    _say(cfg, f"wrote {path}")


def _cmd_run(cfg: RunConfig):
    sc = cfg.scenario
    if sc.kind == "dam-break":
        run_dam_break(cfg)
        return
    if sc.kind == "plate-transient":
        rows = _plate_rows(cfg, replace(sc, resolutions=sc.resolutions[:1]))
    else:
        rows = list(error_csv_rows(sc.name, sc.rule,
                                   _run_channels(cfg, sc.resolutions[:1])))
    _write_errors(cfg, rows)


def _cmd_study(cfg: RunConfig):
    sc = cfg.scenario
    if sc.kind == "dam-break":
        raise ValueError("dam-break scenarios run through the dam-break command")
    if sc.kind == "plate-transient":
        rows = _plate_rows(cfg, sc)
    else:
        rows = list(error_csv_rows(sc.name, sc.rule,
                                   _run_channels(cfg, sc.resolutions)))
    _write_errors(cfg, rows)


def run_dam_break(cfg: RunConfig) -> dict:
    """Run the full and simplified variants of the configured rule from the
    same initial column; write front.csv and optional snapshots."""
    sc = cfg.scenario
    if sc.kind != "dam-break":
        raise ValueError(f"scenario kind {sc.kind!r} is not dam-break")
    root = sc.rule.removesuffix("-simplified")
    out = Path(cfg.out_dir)
    fronts: dict[str, dict[int, int]] = {}
    drifts: dict[str, float] = {}
    for label, rule in (("full", root), ("simplified", root + "-simplified")):
        cb = None
        if cfg.snapshots_every:
            sdir = out / label
            sdir.mkdir(parents=True, exist_ok=True)

            def cb(step, solver, sdir=sdir):
                inner = (slice(1, -1),) * 3
                write_snapshot(solver.f[inner], solver.flags[inner],
                               solver.fill[inner], sdir / f"snap_{step}.vtk",
                               solver.params, profile_axis="x")

        fronts[label], drifts[label] = run_dam_break_rule(
            sc, rule, snapshot_cb=cb, snap_every=cfg.snapshots_every)
        _say(cfg, f"{sc.name} {label} ({rule}): fronts "
                  + " ".join(f"{s}:{x}" for s, x in sorted(fronts[label].items()))
                  + f", mass drift {drifts[label]:.3e}")
    path = out / "front.csv"
    with open(path, "w", newline="") as fh:
        fh.write("step,x_full,x_simplified\n")
        for step in sorted(fronts["full"]):
            fh.write(f"{step},{fronts['full'][step]},{fronts['simplified'][step]}\n")
    _say(cfg, f"wrote {path}")
    return {"fronts": fronts, "mass_drift": drifts}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        sc, cfg = parse_config(args.config)
        cfg = _apply_flags(args, sc, cfg)
        Path(cfg.out_dir).mkdir(parents=True, exist_ok=True)
        if args.command == "run":
            _cmd_run(cfg)
        elif args.command == "study":
            _cmd_study(cfg)
        else:
            run_dam_break(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"error: run diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
