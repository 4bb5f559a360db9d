"""
Virtual sheep and the discrimination ledger, by hand
====================================================

The engine runs these steps in a compiled loop.  Here the same schedule is
spelled out with the per-agent reference functions for the first few
observation periods, printing each sheep's prediction error and the two
thresholds.
"""

import numpy as np

from heteroherd.discrimination import DiscriminationConfig, ThresholdMode, discriminate, dynamic_threshold
from heteroherd.dynamics import ForceProfile, VariantAlpha, flock_displacements, gain_table
from heteroherd.engine import TrialConfig, spawn_initial
from heteroherd.shepherd import nearest_sheep, refresh_target, shepherd_step
from heteroherd.virtual import BetaEstimate, advance_or_reposition, estimated_gains, virtual_displacements

N, M = 8, 2
alpha = VariantAlpha(1, 1, 0, 0)  # variants feel neither attraction nor the shepherd
cfg = TrialConfig(n_sheep=N, n_variant=M, alpha=alpha, spawn_radius=25.0, seed=3)
init = spawn_initial(cfg)
profile = ForceProfile()
gains = gain_table(profile, N, M, alpha)
vgains = estimated_gains(profile, BetaEstimate.from_alpha(alpha), N)
goal = np.array(cfg.goal_center)
dcfg = DiscriminationConfig(mode=ThresholdMode.DYNAMIC)
T = dcfg.period

x, v, xd = init.positions.copy(), np.zeros((N, 2)), init.shepherd.copy()
twin, ledger = init.virtual, init.ledger
target = refresh_target(x, ledger.guided(), goal)

for k in range(4 * T + 1):
    if k % T == 0 and k > 0:
        # distances use the twin *before* it is moved onto the observation
        d = np.hypot(*(x - twin.positions).T)
        ledger, events = discriminate(ledger, d.tolist(), k, dcfg, [i >= N - M for i in range(N)])
        print(f"k={k:3d}  d=" + " ".join(f"{di:6.2f}" for di in d)
              + f"   IQR fence {dynamic_threshold(d):6.2f}   static 5.00")
        for e in events:
            kind = "variant" if e.is_variant else "normal"
            print(f"        {e.action.value:9s} sheep {e.sheep} ({kind})")
        target = refresh_target(x, ledger.guided(), goal)
    n = nearest_sheep(xd, x)
    vd = shepherd_step(xd, x[target], x[n], goal)
    vel = flock_displacements(x, v, gains, xd, profile.perception_radius)
    ph = virtual_displacements(twin, xd, vgains, profile.perception_radius)
    twin = advance_or_reposition(twin, ph, k, T, x if k % T == 0 else None)
    x, v, xd = x + vel, vel, xd + vd

print("guided at the end:", ledger.guided())
