"""Batch experiment runner.

    hypequil <task> --config <path> [--seed N] [--out DIR] [--plot]

Tasks: resolve, ppa, verify, grid-oracle.  The effective configuration
(defaults included) is echoed into the output directory next to the task
artifacts; fixed config and seed give byte-identical numeric outputs
(the ppa trace's wall-clock column is the one documented exception).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import geometry as geo
from .acceptance import run_suite, settings_from_verify
from .config import ExperimentConfig, parse_config
from .errors import HypequilError
from .ppa import constant_schedule, geometric_schedule, run_ppa
from .plotting import render_svg
from .regions import build_grid
from .resolvent import oracle_merit_table, oracle_index, resolve

FMT = ".17g"


def _dump_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _query_point(cfg: ExperimentConfig, key: str):
    coords = getattr(cfg, key)
    if coords is not None:
        return geo.hpoint(coords)
    return cfg.region().witness()


def _lambda_schedule(cfg: ExperimentConfig):
    lam = cfg.ppa["lambda"]
    if lam["kind"] == "constant":
        return constant_schedule(lam["value"])
    return geometric_schedule(lam["initial"], lam["ratio"])


def run_task(cfg: ExperimentConfig, out_dir: Path) -> int:
    """Execute one task; returns the process exit status."""
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "effective-config.json").write_text(cfg.echo_text())
    try:
        if cfg.task == "resolve":
            return _task_resolve(cfg, out_dir)
        if cfg.task == "ppa":
            return _task_ppa(cfg, out_dir)
        if cfg.task == "grid-oracle":
            return _task_grid_oracle(cfg, out_dir)
        return _task_verify(cfg, out_dir)
    except HypequilError as exc:
        (out_dir / "error.marker").write_text(f"{type(exc).__name__}: {exc}\n")
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _maybe_plot(cfg, out_dir, **scene):
    if cfg.plot and cfg.dimension == 2:
        (out_dir / "plot.svg").write_text(render_svg(region=cfg.region(),
                                                     **scene))


def _task_resolve(cfg, out_dir):
    region = cfg.region()
    f = cfg.bifunction()
    x = _query_point(cfg, "x")
    out = resolve(f, region, x, cfg.solver_options())
    _dump_json(out_dir / "outcome.json", out.to_dict())
    _maybe_plot(cfg, out_dir, query=x, resolvent=out.z)
    return 0


def _task_ppa(cfg, out_dir):
    region = cfg.region()
    f = cfg.bifunction()
    x0 = _query_point(cfg, "x0")
    trace = run_ppa(f, region, x0, _lambda_schedule(cfg),
                    stop_tol=cfg.ppa["stop_tol"],
                    max_steps=cfg.ppa["max_steps"],
                    opts=cfg.solver_options())
    (out_dir / "trace.csv").write_text(trace.to_csv_text())
    _dump_json(out_dir / "trace-summary.json",
               {"steps": len(trace), "status": trace.status,
                "final": geo.point_to_list(trace.final)})
    _maybe_plot(cfg, out_dir, iterates=[trace.start] + list(trace.iterates),
                query=x0, resolvent=trace.final)
    return 0 if not trace.status.startswith("solver_error") else 2


def _task_grid_oracle(cfg, out_dir):
    region = cfg.region()
    f = cfg.bifunction()
    x = _query_point(cfg, "x")
    opts = cfg.solver_options()
    grid = build_grid(region, opts.grid_spacing, opts.bounding_radius,
                      phase_seed=cfg.seed)
    idx, attained = oracle_index(f, x, grid)
    merits = oracle_merit_table(f, x, grid)
    lines = ["index," + ",".join(f"coord_{i}" for i in range(cfg.dimension + 1))
             + ",merit"]
    for i in range(len(grid)):
        coords = ",".join(format(c, FMT) for c in grid.points[i])
        lines.append(f"{i},{coords},{format(merits[i], FMT)}")
    (out_dir / "merit-table.csv").write_text("\n".join(lines) + "\n")
    _dump_json(out_dir / "oracle.json",
               {"z": geo.point_to_list(grid.points[idx]), "index": int(idx),
                "attained_min": float(attained), "grid_size": len(grid),
                "spacing": grid.spacing})
    _maybe_plot(cfg, out_dir, query=x,
                resolvent=np.ascontiguousarray(grid.points[idx]))
    return 0


def _task_verify(cfg, out_dir):
    settings = settings_from_verify(cfg.verify, cfg.seed, cfg.solver)
    verdicts = run_suite(settings, progress=lambda s: print(s))
    text = "\n".join(v.to_json_line() for v in verdicts) + "\n"
    (out_dir / "verdicts.jsonl").write_text(text)
    failed = [v for v in verdicts if not v.passed]
    print(f"{len(verdicts) - len(failed)}/{len(verdicts)} properties passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="hypequil",
        description="equilibrium-resolvent experiments on hyperbolic space")
    parser.add_argument("task", choices=["resolve", "ppa", "verify",
                                         "grid-oracle"])
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--seed", type=int, default=None,
                        help="override the config seed")
    parser.add_argument("--out", default=None,
                        help="override the config output directory")
    parser.add_argument("--plot", action="store_true",
                        help="write a Poincare-disk SVG (dimension 2)")
    args = parser.parse_args(argv)

    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        cfg = parse_config(text)
    except HypequilError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output"] = args.out
    if args.plot:
        overrides["plot"] = True
    if args.task != cfg.task:
        overrides["task"] = args.task
    if overrides:
        eff = cfg.effective()
        eff.update(overrides)
        cfg = parse_config(json.dumps(eff))

    return run_task(cfg, Path(cfg.output))


if __name__ == "__main__":
    sys.exit(main())
