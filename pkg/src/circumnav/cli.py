"""Command-line entry point.

    circumnav run SCENARIO [--set key=value ...] [--out DIR] [--seed N]
                           [--check-only] [--sweep key=v1,v2 ...] [--workers N]
    circumnav list
    circumnav show SCENARIO

SCENARIO is a bundled name (see ``circumnav list``) or a TOML path. Outputs
go to ``DIR/<scenario name>``; DIR defaults to ``$CIRCUMNAV_OUTPUT_DIR`` or
``./circumnav-out``. Exit status: 0 success, 2 configuration or validation
failure, 3 divergence.
"""
from __future__ import annotations

import argparse
import itertools
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as cfgmod
from .errors import ConfigError, DivergedError, ValidationError
from .output import PLOT_KINDS, emit_plot_data, write_json, write_trace
from .report import format_report
from .simulation import run

EXIT_OK, EXIT_INVALID, EXIT_DIVERGED = 0, 2, 3
OUTPUT_ENV = "CIRCUMNAV_OUTPUT_DIR"


def output_root(arg=None) -> Path:
    return Path(arg or os.environ.get(OUTPUT_ENV) or "circumnav-out")


def _parse_sweep(items):
    """``["a.b=1,2", "c=3"]`` -> list of override lists, one per grid point."""
    axes = []
    for item in items:
        if "=" not in item:
            raise ConfigError(f"sweep axis {item!r} is not of the form key=v1,v2,...")
        key, values = item.split("=", 1)
        axes.append([f"{key}={v}" for v in values.split(",") if v.strip()])
    return [list(point) for point in itertools.product(*axes)]


def execute(scenario: str, overrides=(), out=None, seed=None, check_only=False,
            plots=tuple(PLOT_KINDS), quiet=False, directory=None) -> dict:
    """Load, validate and (unless ``check_only``) run one scenario.

    Files go to ``directory`` when given, else to ``<out root>/<name>``.

    Returns ``{"status", "directory", "message", "metrics"}``; never raises
    for configuration, validation or divergence failures.
    """
    say = (lambda *a, **k: None) if quiet else print
    try:
        cfg = cfgmod.resolve(scenario, overrides)
        if seed is not None:
            cfg = cfgmod.with_seed(cfg, seed)
        report = cfg.report()
        directory = Path(directory) if directory is not None else output_root(out) / cfg.name
        directory.mkdir(parents=True, exist_ok=True)
        write_json(cfgmod.finite_dict(report), directory / cfg.output.report)
        text = format_report(report)
        (directory / "report.txt").write_text(text)
        if check_only:
            say(text, end="")
        cfg.validate()
        for line in cfg.warnings:
            print(f"warning: {line}", file=sys.stderr)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return {"status": EXIT_INVALID, "directory": None, "message": str(exc), "metrics": None}
    if check_only:
        return {"status": EXIT_OK, "directory": str(directory), "message": "checked",
                "metrics": None}

    started = time.perf_counter()
    try:
        trace, metrics = run(cfg.sim)
    except DivergedError as exc:
        write_json(cfgmod.finite_dict({"error": str(exc), "state": exc.row}),
                   directory / "diverged.json")
        print(f"error: {exc}", file=sys.stderr)
        return {"status": EXIT_DIVERGED, "directory": str(directory), "message": str(exc),
                "metrics": None}
    elapsed = time.perf_counter() - started
    write_trace(trace, directory / cfg.output.trace)
    m = cfgmod.finite_dict(metrics.to_dict())
    write_json(m, directory / cfg.output.metrics)
    for kind in plots:
        emit_plot_data(trace, kind, directory / "plots", cfg.sim.controller.r_d)
    say(f"{cfg.name}: {len(trace)} samples in {elapsed:.2f} s; "
        f"final |d-r_d| = {metrics.final_abs_error:.4g} m, "
        f"steady max = {metrics.steady_max_error:.4g} m, "
        f"saturation duty = {metrics.saturation_duty:.3g} -> {directory}")
    return {"status": EXIT_OK, "directory": str(directory), "message": "ok", "metrics": m}


def _sweep_worker(job):
    scenario, overrides, out, seed, check_only, plots = job
    return execute(scenario, overrides, seed=seed, check_only=check_only, plots=plots,
                   quiet=True, directory=out)


def _run_sweep(args) -> int:
    try:
        grid = _parse_sweep(args.sweep)
        base = cfgmod.resolve(args.scenario, args.set)
    except (ConfigError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    root = output_root(args.out) / base.name
    plots = () if args.no_plots else tuple(PLOT_KINDS)
    jobs = [(args.scenario, list(args.set) + point, str(root / f"sweep_{i:03d}"),
             args.seed, args.check_only, plots) for i, point in enumerate(grid)]
    # Processes rather than threads: runs are pure-Python and CPU bound.
    with ProcessPoolExecutor(max_workers=args.workers) as pool:
        results = list(pool.map(_sweep_worker, jobs))
    summary = [{"overrides": job[1], **res} for job, res in zip(jobs, results)]
    root.mkdir(parents=True, exist_ok=True)
    write_json({"runs": summary}, root / "sweep.json")
    for row in summary:
        print(f"[{row['status']}] {' '.join(row['overrides'])} -> {row['directory']}")
    statuses = {r["status"] for r in results}
    if EXIT_DIVERGED in statuses:
        return EXIT_DIVERGED
    if EXIT_INVALID in statuses:
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="circumnav",
                                     description="Range-only circumnavigation simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="validate and simulate a scenario")
    p.add_argument("scenario", help="bundled scenario name or path to a TOML file")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a field, e.g. --set controller.c2=40")
    p.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./circumnav-out)")
    p.add_argument("--seed", type=int, help="reseed noise and random target motion")
    p.add_argument("--check-only", action="store_true",
                   help="print the feasibility report without simulating")
    p.add_argument("--sweep", action="append", default=[], metavar="KEY=V1,V2",
                   help="run the Cartesian grid of the given values")
    p.add_argument("--workers", type=int, default=None, help="parallel sweep workers")
    p.add_argument("--no-plots", action="store_true", help="skip plot-data files")

    sub.add_parser("list", help="list bundled scenarios")
    s = sub.add_parser("show", help="print a scenario file with defaults applied")
    s.add_argument("scenario")
    s.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name in cfgmod.bundled_names():
            cfg = cfgmod.resolve(name)
            print(f"{name:18s} {cfg.mode:12s} {cfg.description}")
        return EXIT_OK
    if args.command == "show":
        try:
            print(cfgmod.dumps(cfgmod.resolve(args.scenario, args.set)), end="")
        except (ConfigError, ValidationError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        return EXIT_OK
    if args.sweep:
        return _run_sweep(args)
    plots = () if args.no_plots else tuple(PLOT_KINDS)
    return execute(args.scenario, args.set, args.out, args.seed, args.check_only, plots)["status"]


if __name__ == "__main__":
    sys.exit(main())
