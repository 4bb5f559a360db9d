"""Static SVG figures from sweep reports and recorded trials.

Plotting only reads persisted files.  Output is deterministic: the SVG id
salt is the source's config hash and no timestamp is written, so replotting
the same input yields identical bytes.  Every file carries the config hash
in its metadata description.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Iterable, Sequence

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from .experiment import CellSummary, SweepReport, misjudgement_correlation, threshold_scatter  # noqa: E402

PLOT_KINDS = ("success_vs_m", "time_vs_m", "threshold_scatter", "misjudgement_scatter", "trajectory_frames")
POLICY_COLORS = {"FAT": "tab:gray", "Static": "tab:blue", "Dynamic": "tab:orange"}
FORCE_PANELS = {1: "one force", 2: "two forces", 3: "three forces"}


class PlotError(ValueError):
    pass


def _save(fig: Figure, path: Path, config_hash: str) -> Path:
    with rc_context({"svg.hashsalt": config_hash, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None, "Description": f"config_hash={config_hash}"})
    return path


def line_series(cells: Sequence[CellSummary], policy: str, attr: str) -> dict[str, list[tuple[int, float]]]:
    """Per-alpha ``(M, value)`` points of one policy, sorted by M."""
    out: dict[str, list[tuple[int, float]]] = {}
    for c in cells:
        if c.policy == policy:
            out.setdefault(c.alpha, []).append((c.n_variant, getattr(c, attr)))
    return {a: sorted(pts) for a, pts in out.items()}


def _vs_m(report: SweepReport, out: Path, attr: str, ylabel: str, stem: str) -> list[Path]:
    chash = report.provenance["config_hash"]
    paths = []
    policies = list(dict.fromkeys(c.policy for c in report.cells))
    if not policies:
        raise PlotError("report has no cells")
    for policy in policies:
        series = line_series(report.cells, policy, attr)
        groups = sorted({a.count("1") for a in series})
        fig = Figure(figsize=(4.2 * len(groups), 3.4))
        axes = fig.subplots(1, len(groups), squeeze=False)[0]
        for ax, g in zip(axes, groups):
            for alpha, pts in series.items():
                if alpha.count("1") != g:
                    continue
                ms, ys = zip(*pts)
                ax.plot(ms, ys, marker="o", ms=3, lw=1, label=f"α={alpha}")
            ax.set_title(f"{policy}: variants receive {FORCE_PANELS.get(g, f'{g} forces')}", fontsize=9)
            ax.set_xlabel("number of variant sheep M")
            ax.set_ylabel(ylabel)
            if attr == "success_rate":
                ax.set_ylim(-2, 102)
            ax.legend(fontsize=7)
        fig.tight_layout()
        paths.append(_save(fig, out / f"{stem}_{policy}.svg", chash))
    return paths


def plot_threshold_scatter(report: SweepReport, out: Path) -> list[Path]:
    chash = report.provenance["config_hash"]
    ms = sorted({c.n_variant for c in report.cells if c.policy != "FAT"})
    if not ms:
        raise PlotError("threshold scatter needs Static or Dynamic cells")
    fig = Figure(figsize=(4.0 * len(ms), 3.4))
    axes = fig.subplots(1, len(ms), squeeze=False)[0]
    for ax, m in zip(axes, ms):
        pts = threshold_scatter(report.cells, n_variant=m)
        for policy in ("Static", "Dynamic"):
            good = [p for p in pts if p.policy == policy and p.defined]
            bad = [p for p in pts if p.policy == policy and not p.defined]
            if good:
                ax.scatter([p.threshold for p in good], [p.success_rate for p in good], s=14,
                           color=POLICY_COLORS[policy], label=policy)
            if bad:
                # no flag event in the cell: threshold undefined, drawn on the left axis
                ax.scatter([0.0] * len(bad), [p.success_rate for p in bad], s=20, marker="x",
                           color=POLICY_COLORS[policy], label=f"{policy} (undefined)")
        ax.set_title(f"M = {m} ({len(pts)} points)", fontsize=9)
        ax.set_xlabel("mean threshold at flag events")
        ax.set_ylabel("success rate (%)")
        ax.set_ylim(-2, 102)
        ax.legend(fontsize=7)
    fig.tight_layout()
    return [_save(fig, out / "threshold_scatter.svg", chash)]


def plot_misjudgement_scatter(report: SweepReport, out: Path) -> list[Path]:
    chash = report.provenance["config_hash"]
    fig = Figure(figsize=(5.0, 3.8))
    ax = fig.subplots()
    drawn = False
    for policy in ("Static", "Dynamic"):
        r, pts = misjudgement_correlation(report.cells, policy)
        if not pts:
            continue
        drawn = True
        xs, ys = zip(*pts)
        rtxt = "undefined" if r is None else f"{r:+.3f}"
        ax.scatter(xs, ys, s=12, color=POLICY_COLORS[policy], label=f"{policy} (r = {rtxt})")
    if not drawn:
        raise PlotError("misjudgement scatter needs Static or Dynamic cells")
    ax.set_xlabel("success rate (%)")
    ax.set_ylabel("misjudgements per trial")
    ax.legend(fontsize=8)
    fig.tight_layout()
    return [_save(fig, out / "misjudgement_scatter.svg", chash)]


def frame_steps(rows: Iterable[tuple], n_frames: int | None = None) -> list[int]:
    """Recorded steps, or ``n_frames`` of them spread evenly (first and last kept)."""
    steps = sorted({r[0] for r in rows})
    if n_frames is None or len(steps) <= n_frames:
        return steps
    idx = sorted({round(i * (len(steps) - 1) / (n_frames - 1)) for i in range(n_frames)})
    return [steps[i] for i in idx]


def draw_frame(ax, here: Sequence[tuple], goal: Sequence[float], goal_radius: float, step: int) -> None:
    """Draw the rows of one recorded step."""
    ax.add_patch(Circle(tuple(goal), goal_radius, color="tab:green", alpha=0.25, lw=0, label="goal"))
    for kind, style in (
        ("normal", dict(marker="o", color="tab:blue", s=14, label="normal")),
        ("variant", dict(marker="^", color="tab:purple", s=18, label="variant")),
    ):
        pts = [(r[3], r[4]) for r in here if r[2] == kind]
        if pts:
            xs, ys = zip(*pts)
            ax.scatter(xs, ys, **style)
    tgt = [(r[3], r[4]) for r in here if r[2] == "target"]
    if tgt:
        ax.scatter(*zip(*tgt), s=110, facecolors="none", edgecolors="tab:orange", lw=1.5, label="target")
    sh = [(r[3], r[4]) for r in here if r[2] == "shepherd"]
    if sh:
        ax.scatter(*zip(*sh), marker="s", color="red", s=28, label="shepherd")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(f"k = {step}", fontsize=9)


def plot_trajectory_frames(trial_doc: dict, rows: Sequence[tuple] | None, out: Path,
                           n_frames: int | None = 6, stem: str = "trajectory_frames") -> list[Path]:
    """One timeline figure of ``n_frames`` panels (``n_frames=None``: every
    recorded step, one file each)."""
    if not rows:
        raise PlotError("trial record has no persisted trajectory (rerun with --record-trajectory)")
    chash = trial_doc["config_hash"]
    cfg = trial_doc["config"]
    goal, gr = cfg["goal_center"], cfg["goal_radius"]
    steps = frame_steps(rows, n_frames)
    by_step: dict[int, list[tuple]] = {}
    for r in rows:
        by_step.setdefault(r[0], []).append(r)
    if n_frames is None:
        paths = []
        for s in steps:
            fig = Figure(figsize=(4.0, 4.0))
            ax = fig.subplots()
            draw_frame(ax, by_step[s], goal, gr, s)
            ax.legend(fontsize=6, loc="upper right")
            fig.tight_layout()
            paths.append(_save(fig, out / f"frame_{s:05d}.svg", chash))
        return paths
    cols = min(3, len(steps))
    nrow = math.ceil(len(steps) / cols)
    fig = Figure(figsize=(3.6 * cols, 3.6 * nrow))
    axes = fig.subplots(nrow, cols, squeeze=False).ravel()
    for ax, s in zip(axes, steps):
        draw_frame(ax, by_step[s], goal, gr, s)
    for ax in axes[len(steps):]:
        ax.set_axis_off()
    axes[0].legend(fontsize=6, loc="upper right")
    fig.tight_layout()
    return [_save(fig, out / f"{stem}.svg", chash)]


def emit_plots(source: SweepReport | tuple[dict, Sequence[tuple] | None], kind: str, out_dir: str | Path) -> list[Path]:
    """Render ``kind`` from a sweep report or a ``(trial document, rows)`` pair."""
    if kind not in PLOT_KINDS:
        raise PlotError(f"unknown plot kind {kind!r} (choose from {', '.join(PLOT_KINDS)})")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if kind == "trajectory_frames":
        if isinstance(source, SweepReport):
            raise PlotError("trajectory_frames needs a trial record, not a sweep report")
        doc, rows = source
        return plot_trajectory_frames(doc, rows, out)
    if not isinstance(source, SweepReport):
        raise PlotError(f"{kind} needs a sweep report, not a trial record")
    if kind == "success_vs_m":
        return _vs_m(source, out, "success_rate", "success rate (%)", "success_vs_m")
    if kind == "time_vs_m":
        return _vs_m(source, out, "mean_steps", "mean steps", "time_vs_m")
    if kind == "threshold_scatter":
        return plot_threshold_scatter(source, out)
    return plot_misjudgement_scatter(source, out)
