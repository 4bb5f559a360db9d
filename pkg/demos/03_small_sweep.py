"""
A small sweep and its figures
=============================

Three variant types with M in {1, 4, 7}, five matched seeds per cell, all
three policies.  The figures are rendered from the written report.
"""

from pathlib import Path

from heteroherd import VariantAlpha
from heteroherd.experiment import SweepSpec, misjudgement_correlation, run_sweep
from heteroherd.plots import PLOT_KINDS, emit_plots
from heteroherd.records import load_report

out = Path(__file__).with_suffix("").parent / "out" / "small_sweep"

spec = SweepSpec(
    alphas=(VariantAlpha(1, 0, 0, 0), VariantAlpha(0, 0, 1, 1), VariantAlpha(1, 1, 1, 0)),
    m_values=(1, 4, 7),
    trials_per_cell=5,
)
report = run_sweep(spec, out)

print(f"{'alpha':6s} {'M':>2s} {'policy':8s} {'success%':>8s} {'steps':>7s} {'misjudged':>9s}")
for c in report.cells:
    print(f"{c.alpha:6s} {c.n_variant:2d} {c.policy:8s} {c.success_rate:8.1f} {c.mean_steps:7.0f} "
          f"{c.mean_misjudgements:9.1f}")

for policy in ("Static", "Dynamic"):
    r, _ = misjudgement_correlation(report.cells, policy)
    print(f"{policy}: correlation(success, misjudgements) = {r}")

rep = load_report(out / "report.json")
for kind in PLOT_KINDS[:-1]:
    for p in emit_plots(rep, kind, out / "figures"):
        print("wrote", p)
