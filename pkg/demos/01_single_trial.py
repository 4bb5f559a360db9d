"""
One shepherding trial
=====================

Twenty sheep, four of which ignore the shepherd's repulsion and the
alignment rule.  The shepherd discriminates with the interquartile
threshold and guides only the sheep it still believes to be normal.
"""

from pathlib import Path

from heteroherd import Policy, TrialConfig, VariantAlpha, run_trial
from heteroherd.plots import emit_plots
from heteroherd.records import load_trial, write_trial

out = Path(__file__).with_suffix("").parent / "out" / "single_trial"

cfg = TrialConfig(
    n_variant=4,
    alpha=VariantAlpha(1, 0, 1, 0),  # separation and attraction only
    policy=Policy.DYNAMIC,
    seed=11,
    record_trajectory=True,
)
print("shepherd's estimate of the gains:", cfg.resolved_beta.as_tuple())

res = run_trial(cfg)
print(f"stopped at k={res.terminated_step} ({res.terminated_by.value})")
print(f"normal sheep in the goal: {res.normal_in_goal}/16 -> {100 * res.success_fraction:.0f}%")
print(f"flags on normal sheep: {res.misjudgement_count}")

# persist, then plot from the files only
doc = write_trial(out, cfg, res)
for p in emit_plots(load_trial(doc), "trajectory_frames", out):
    print("wrote", p)
