"""Sweeps over variant types, variant counts and policies.

Every cell ``(alpha, M, policy)`` runs the same list of seeds, so trial
``j`` starts from the same arrangement of sheep in every cell.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .dynamics import NONTRIVIAL_ALPHAS, VariantAlpha
from .engine import Policy, TrialConfig, run_trial, stable_hash
from .virtual import BetaEstimate

log = logging.getLogger(__name__)

DESK_SCALE_TRIALS = 20
ACCEPTANCE_M_VALUES = (1, 4, 7, 10)

TRIAL_COLUMNS = [
    "alpha", "n_variant", "policy", "trial", "seed", "terminated_step", "terminated_by",
    "normal_in_goal", "success_fraction", "misjudgement_count", "misjudged_sheep",
    "n_flags", "flag_threshold_sum", "prediction_error", "spawn_hash", "config_hash", "diagnostic",
]
CELL_COLUMNS = [
    "alpha", "n_forces", "n_variant", "policy", "n_trials", "success_rate", "mean_steps",
    "mean_misjudgements", "mean_flag_threshold", "n_flags",
]


@dataclass(frozen=True)
class SweepSpec:
    alphas: tuple[VariantAlpha, ...] = NONTRIVIAL_ALPHAS
    m_values: tuple[int, ...] = tuple(range(1, 11))
    policies: tuple[Policy, ...] = (Policy.FAT, Policy.STATIC, Policy.DYNAMIC)
    trials_per_cell: int = 100
    master_seed: int = 0
    base: TrialConfig = TrialConfig()
    beta_mismatch: float = 0.9
    derive_beta: bool = True

    def __post_init__(self) -> None:
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be at least 1")
        if not self.alphas or not self.m_values or not self.policies:
            raise ValueError("alphas, m_values and policies must be non-empty")
        for m in self.m_values:
            if not 0 <= m <= self.base.n_sheep:
                raise ValueError(f"m_values entry {m} outside [0, {self.base.n_sheep}]")

    @property
    def n_cells(self) -> int:
        return len(self.alphas) * len(self.m_values) * len(self.policies)

    def cells(self) -> list[tuple[VariantAlpha, int, Policy]]:
        return [(VariantAlpha(*a), m, Policy(p)) for a in self.alphas for m in self.m_values for p in self.policies]

    def seeds(self) -> list[int]:
        return trial_seeds(self.master_seed, self.trials_per_cell)

    def trial_config(self, alpha: VariantAlpha, m: int, policy: Policy, seed: int) -> TrialConfig:
        beta = BetaEstimate.from_alpha(alpha, self.beta_mismatch) if self.derive_beta else self.base.beta
        return self.base.replace(alpha=alpha, n_variant=m, policy=policy, seed=seed, beta=beta, record_trajectory=False)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["alphas"] = [str(VariantAlpha(*a)) for a in self.alphas]
        d["base"] = self.base.to_dict()
        return json.loads(json.dumps(_enum_values(d)))

    def spec_hash(self) -> str:
        return stable_hash(self.to_dict())


def _enum_values(obj: Any) -> Any:
    from .engine import _plain

    return _plain(obj)


def trial_seeds(master_seed: int, n: int) -> list[int]:
    """Seed of trial ``j``: PCG-style hash of ``(master_seed, j)``."""
    return [
        int(np.random.SeedSequence([master_seed, j]).generate_state(1, np.uint64)[0])
        for j in range(n)
    ]


@dataclass
class CellSummary:
    alpha: str
    n_variant: int
    policy: str
    n_trials: int
    success_rate: float
    mean_steps: float
    mean_misjudgements: float
    mean_flag_threshold: float | None
    n_flags: int
    terminations: dict[str, int] = field(default_factory=dict)

    @property
    def n_forces(self) -> int:
        return self.alpha.count("1")

    def as_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self) | {"n_forces": self.n_forces}


@dataclass
class SweepReport:
    cells: list[CellSummary]
    records: list[dict[str, Any]]
    provenance: dict[str, Any]

    def cell(self, alpha: Sequence[int] | str, n_variant: int, policy: Policy | str) -> CellSummary:
        a = alpha if isinstance(alpha, str) else str(VariantAlpha(*alpha))
        p = Policy(policy).value
        for c in self.cells:
            if c.alpha == a and c.n_variant == n_variant and c.policy == p:
                return c
        raise KeyError((a, n_variant, p))

    def to_json(self) -> str:
        doc = {
            "schema": "heteroherd.sweep_report/1",
            "provenance": self.provenance,
            "cells": [c.as_dict() for c in self.cells],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def trials_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# config_hash={self.provenance['config_hash']}\n")
        w = csv.DictWriter(buf, TRIAL_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(self.records)
        return buf.getvalue()

    def cells_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# config_hash={self.provenance['config_hash']}\n")
        w = csv.DictWriter(buf, CELL_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for c in self.cells:
            w.writerow(c.as_dict())
        return buf.getvalue()

    def write(self, out_dir: str | Path) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {"report": out / "report.json", "trials": out / "trials.csv", "cells": out / "cells.csv"}
        paths["report"].write_text(self.to_json())
        paths["trials"].write_text(self.trials_csv())
        paths["cells"].write_text(self.cells_csv())
        return paths

    @classmethod
    def from_json(cls, text: str) -> SweepReport:
        doc = json.loads(text)
        if doc.get("schema") != "heteroherd.sweep_report/1":
            raise ValueError(f"not a sweep report (schema {doc.get('schema')!r})")
        cells = []
        for c in doc["cells"]:
            c = dict(c)
            c.pop("n_forces", None)
            cells.append(CellSummary(**c))
        return cls(cells, [], doc["provenance"])


def _run_one(task: tuple[int, int, TrialConfig]) -> dict[str, Any]:
    cell_index, trial_index, cfg = task
    try:
        rec = run_trial(cfg).to_record(cfg)
    except Exception as exc:  # a broken trial must not sink the sweep
        log.exception("trial %d of cell %d failed", trial_index, cell_index)
        rec = {
            "config_hash": cfg.config_hash(), "seed": cfg.seed, "policy": Policy(cfg.policy).value,
            "alpha": str(VariantAlpha(*cfg.alpha)), "n_sheep": cfg.n_sheep, "n_variant": cfg.n_variant,
            "terminated_step": cfg.max_steps, "terminated_by": "Error", "normal_in_goal": 0,
            "success_fraction": 0.0, "misjudgement_count": 0, "misjudged_sheep": 0, "n_flags": 0,
            "flag_threshold_sum": 0.0, "spawn_hash": "", "diagnostic": repr(exc),
        }
    rec["trial"] = trial_index
    return rec


def aggregate(records: Iterable[dict[str, Any]], static_threshold: float = 5.0) -> list[CellSummary]:
    """Fold per-trial records into per-cell means, in first-seen cell order."""
    groups: dict[tuple[str, int, str], list[dict[str, Any]]] = {}
    for r in records:
        groups.setdefault((r["alpha"], int(r["n_variant"]), r["policy"]), []).append(r)
    cells = []
    for (alpha, m, policy), rs in groups.items():
        n_flags = sum(int(r["n_flags"]) for r in rs)
        if n_flags:
            thr = sum(float(r["flag_threshold_sum"]) for r in rs) / n_flags
        elif policy == Policy.STATIC.value:
            thr = static_threshold
        else:
            thr = None
        cells.append(
            CellSummary(
                alpha=alpha,
                n_variant=m,
                policy=policy,
                n_trials=len(rs),
                success_rate=100.0 * float(np.mean([float(r["success_fraction"]) for r in rs])),
                mean_steps=float(np.mean([int(r["terminated_step"]) for r in rs])),
                mean_misjudgements=float(np.mean([int(r["misjudgement_count"]) for r in rs])),
                mean_flag_threshold=thr,
                n_flags=n_flags,
                terminations=dict(sorted(Counter(r["terminated_by"] for r in rs).items())),
            )
        )
    return cells


def run_sweep(
    spec: SweepSpec,
    out_dir: str | Path | None = None,
    jobs: int = 1,
    progress: Callable[[int, int], None] | None = None,
) -> SweepReport:
    """Run every cell of ``spec`` and aggregate; optionally persist the files."""
    seeds = spec.seeds()
    tasks = [
        (ci, j, spec.trial_config(a, m, p, s))
        for ci, (a, m, p) in enumerate(spec.cells())
        for j, s in enumerate(seeds)
    ]
    records: list[dict[str, Any]] = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, rec in enumerate(pool.map(_run_one, tasks, chunksize=max(1, len(tasks) // (8 * jobs)))):
                records.append(rec)
                if progress:
                    progress(i + 1, len(tasks))
    else:
        for i, t in enumerate(tasks):
            records.append(_run_one(t))
            if progress:
                progress(i + 1, len(tasks))

    report = SweepReport(
        cells=aggregate(records, spec.base.discrimination.static_threshold),
        records=records,
        provenance={
            "config_hash": spec.spec_hash(),
            "seeds": seeds,
            "code_version": __version__,
            "spec": spec.to_dict(),
        },
    )
    if out_dir is not None:
        report.write(out_dir)
    return report


@dataclass(frozen=True)
class ThresholdPoint:
    alpha: str
    n_variant: int
    policy: str
    threshold: float | None
    success_rate: float

    @property
    def defined(self) -> bool:
        return self.threshold is not None


def threshold_scatter(
    cells: Iterable[CellSummary], n_variant: int | None = None
) -> list[ThresholdPoint]:
    """(mean flag threshold, success rate) per (alpha, discriminating policy)."""
    pts = []
    for c in cells:
        if c.policy == Policy.FAT.value:
            continue
        if n_variant is not None and c.n_variant != n_variant:
            continue
        pts.append(ThresholdPoint(c.alpha, c.n_variant, c.policy, c.mean_flag_threshold, c.success_rate))
    return pts


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float | None:
    """Product-moment correlation, or ``None`` when either side is constant."""
    x = np.asarray(xs, float)
    y = np.asarray(ys, float)
    if x.size < 2 or x.size != y.size:
        return None
    dx = x - x.mean()
    dy = y - y.mean()
    den = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if den == 0.0:
        return None
    return float(dx @ dy) / den


def misjudgement_correlation(
    cells: Iterable[CellSummary], policy: Policy | str | None = None
) -> tuple[float | None, list[tuple[float, float]]]:
    """Correlation between cell success rate and mean misjudgement count."""
    chosen = [
        c for c in cells
        if c.policy != Policy.FAT.value and (policy is None or c.policy == Policy(policy).value)
    ]
    pts = [(c.success_rate, c.mean_misjudgements) for c in chosen]
    if not pts:
        return None, pts
    xs, ys = zip(*pts)
    return pearson(xs, ys), pts
