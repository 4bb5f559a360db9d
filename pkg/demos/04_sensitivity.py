"""
How sensitive is the homogeneous baseline?
==========================================

With every sheep normal, FAT alone should gather the flock.  Under the
default model it rarely does: close encounters produce very large
separation kicks, and the unbounded inverse-square repulsion lets the
shepherd push the farthest sheep outward for thousands of steps.  This
script reruns the baseline with the exploratory knobs (all off by default,
never used by the acceptance suite) to show which assumptions matter.
"""

import math

import numpy as np

from heteroherd import Policy, TrialConfig, run_trial
from heteroherd.experiment import trial_seeds

seeds = trial_seeds(0, 20)
variants = {
    "defaults": {},
    "repulsion_range=20": dict(repulsion_range=20.0),
    "repulsion_range=20, step_scale=0.5": dict(repulsion_range=20.0, step_scale=0.5),
    "repulsion_range=20, max_step_norm=5": dict(repulsion_range=20.0, max_step_norm=5.0),
    "zero-lag twin": dict(reposition_mode="zero_lag"),
    "printed signs": dict(sign_convention="Verbatim"),
}

for name, knobs in variants.items():
    base = TrialConfig(n_variant=0, policy=Policy.FAT, **knobs)
    res = [run_trial(base.replace(seed=s)) for s in seeds]
    rate = 100 * np.mean([r.success_fraction for r in res])
    steps = np.mean([r.terminated_step for r in res])
    done = sum(r.terminated_by.value == "GoalReached" for r in res)
    print(f"{name:38s} success {rate:5.1f}%   goal reached {done:2d}/20   mean steps {steps:7.0f}")

print("default repulsion range:", TrialConfig().repulsion_range, "== inf:", math.isinf(TrialConfig().repulsion_range))
