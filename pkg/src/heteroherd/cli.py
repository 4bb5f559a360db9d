"""Command-line entry point: ``heteroherd {run,sweep,plot,replay}``.

Log verbosity comes from ``HETEROHERD_LOG`` (DEBUG, INFO, WARNING, ...;
default WARNING).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .engine import Policy, run_trial
from .experiment import run_sweep
from .plots import PLOT_KINDS, PlotError, emit_plots, plot_trajectory_frames
from .records import REPORT_SCHEMA, SchemaError, load_json, load_report, load_trial, write_trial

log = logging.getLogger("heteroherd")


def _setup_logging() -> None:
    level = os.environ.get("HETEROHERD_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def cmd_run(args: argparse.Namespace) -> int:
    over = {}
    if args.seed is not None:
        over["seed"] = args.seed
    if args.policy is not None:
        over["policy"] = args.policy
    if args.record_trajectory:
        over["record_trajectory"] = True
    cfg = parse_config(args.config, over, kind="trial")
    log.info("resolved config %s", cfg.config_hash())
    result = run_trial(cfg)
    if args.out:
        path = write_trial(args.out, cfg, result)
        print(path)
    else:
        print(json.dumps({"config": cfg.to_dict(), "record": result.to_record(cfg)}, indent=2, sort_keys=True))
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = parse_config(args.spec, kind="sweep")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "spec.resolved.json").write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    total = spec.n_cells * spec.trials_per_cell
    log.info("sweep %s: %d cells, %d trials", spec.spec_hash(), spec.n_cells, total)

    def progress(done: int, n: int) -> None:
        if done % max(1, n // 20) == 0 or done == n:
            log.info("%d/%d trials", done, n)

    report = run_sweep(spec, out, jobs=args.jobs, progress=progress)
    failed = sum(c.terminations.get("Error", 0) for c in report.cells)
    if failed:
        log.warning("%d trials aborted with an error (recorded in trials.csv)", failed)
    print(out / "report.json")
    return 0


def _load_any(path: str):
    doc = load_json(path)
    if doc["schema"] == REPORT_SCHEMA:
        return load_report(path)
    return load_trial(path)


def cmd_plot(args: argparse.Namespace) -> int:
    for p in emit_plots(_load_any(args.input), args.kind, args.out):
        print(p)
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    doc, rows = load_trial(args.input)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if rows and args.stride > 1:
        steps = sorted({r[0] for r in rows})[:: args.stride]
        keep = set(steps)
        rows = [r for r in rows if r[0] in keep]
    for p in plot_trajectory_frames(doc, rows, out, n_frames=None):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="heteroherd", description="Shepherding with variant-sheep discrimination.")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a single trial")
    r.add_argument("--config", help="trial config (JSON or YAML); omitted -> defaults")
    r.add_argument("--seed", type=int)
    r.add_argument("--policy", choices=[p.value for p in Policy])
    r.add_argument("--record-trajectory", action="store_true")
    r.add_argument("--out", help="directory for trial.json (and trajectory.csv); default prints to stdout")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="run a sweep spec")
    s.add_argument("--spec", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--jobs", type=int, default=1)
    s.set_defaults(func=cmd_sweep)

    p = sub.add_parser("plot", help="render figures from a report or trial record")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--kind", required=True, choices=PLOT_KINDS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_plot)

    y = sub.add_parser("replay", help="render every recorded frame of a trial")
    y.add_argument("--in", dest="input", required=True)
    y.add_argument("--out", required=True)
    y.add_argument("--stride", type=int, default=1, help="keep every n-th recorded frame")
    y.set_defaults(func=cmd_replay)
    return ap


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, PlotError) as exc:
        print(f"heteroherd {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"heteroherd {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
