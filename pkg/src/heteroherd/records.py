"""On-disk documents: single-trial records and sweep reports."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .engine import TrialConfig, TrialResult, read_trajectory_csv, write_trajectory_csv
from .experiment import SweepReport

TRIAL_SCHEMA = "heteroherd.trial/1"
REPORT_SCHEMA = "heteroherd.sweep_report/1"


class SchemaError(ValueError):
    """Input file was not produced by this package (or is a different kind)."""


def trial_document(cfg: TrialConfig, result: TrialResult, trajectory_file: str | None = None) -> dict[str, Any]:
    return {
        "schema": TRIAL_SCHEMA,
        "config_hash": cfg.config_hash(),
        "config": cfg.to_dict(),
        "record": result.to_record(cfg),
        "events": [e.as_dict() for e in result.events],
        "trajectory": trajectory_file,
    }


def write_trial(out_dir: str | Path, cfg: TrialConfig, result: TrialResult) -> Path:
    """Write ``trial.json`` (and ``trajectory.csv`` if one was recorded)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    traj_name = None
    if result.trajectory is not None:
        traj_name = "trajectory.csv"
        write_trajectory_csv(result.trajectory, out / traj_name, cfg.config_hash())
    path = out / "trial.json"
    path.write_text(json.dumps(trial_document(cfg, result, traj_name), indent=2, sort_keys=True) + "\n")
    return path


def load_json(path: str | Path) -> dict[str, Any]:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: cannot load JSON ({exc})") from exc
    if not isinstance(doc, dict) or "schema" not in doc:
        raise SchemaError(f"{path}: missing 'schema' field")
    return doc


def load_trial(path: str | Path) -> tuple[dict[str, Any], list[tuple[int, int, str, float, float]] | None]:
    """Trial document plus its persisted trajectory rows (``None`` if absent)."""
    doc = load_json(path)
    if doc["schema"] != TRIAL_SCHEMA:
        raise SchemaError(f"{path}: expected a trial record, found schema {doc['schema']!r}")
    rows = None
    if doc.get("trajectory"):
        traj = Path(path).parent / doc["trajectory"]
        chash, rows = read_trajectory_csv(traj)
        if chash is not None and chash != doc["config_hash"]:
            raise SchemaError(f"{traj}: config hash {chash} does not match trial record {doc['config_hash']}")
    return doc, rows


def load_report(path: str | Path) -> SweepReport:
    doc = load_json(path)
    if doc["schema"] != REPORT_SCHEMA:
        raise SchemaError(f"{path}: expected a sweep report, found schema {doc['schema']!r}")
    return SweepReport.from_json(Path(path).read_text())
