import math

import numpy as np
import pytest

from heteroherd._kernels import advance_block
from heteroherd.dynamics import ForceProfile, flock_displacements, sheep_step
from heteroherd.engine import TrialConfig, run_trial
from heteroherd.experiment import trial_seeds
from heteroherd.virtual import (
    BetaEstimate,
    RepositionMode,
    ScheduleError,
    VirtualFlock,
    advance_or_reposition,
    estimated_gains,
    snap_to,
    virtual_displacements,
    virtual_step,
)

PROFILE = ForceProfile()
R = PROFILE.perception_radius


def test_exact_beta_matches_actual_step():
    rng = np.random.default_rng(1)
    pos = rng.uniform(-10, 10, (6, 2))
    prev = rng.normal(0, 1, (6, 2))
    vf = VirtualFlock(pos.copy(), prev.copy())
    sh = np.array([0.0, -15.0])
    for i in range(6):
        np.testing.assert_array_equal(
            virtual_step(vf, sh, BetaEstimate(), PROFILE, i),
            sheep_step(pos, prev, PROFILE.gains, sh, i, R),
        )


def test_isolated_virtual_sheep_examples():
    vf = VirtualFlock.from_positions(np.array([[0.0, 0.0]]))
    beta = BetaEstimate(1, 1, 1, 0.9)
    np.testing.assert_allclose(virtual_step(vf, np.array([2.0, 0.0]), beta, PROFILE, 0), [-112.5, 0.0])
    np.testing.assert_allclose(virtual_step(vf, np.array([1.0, 0.0]), beta, PROFILE, 0), [-0.9 * 500, 0.0])


def test_beta_from_alpha():
    assert BetaEstimate.from_alpha((1, 0, 1, 0)).as_tuple() == (1.0, 0.9, 1.0, 0.9)
    with pytest.raises(ValueError):
        BetaEstimate(1, 0, 1, 1)


def test_reposition_and_advance():
    T = 10
    vf = VirtualFlock(np.array([[100.0, -3.0]]), np.array([[1.0, 0.0]]))
    after = advance_or_reposition(vf, np.array([[5.0, 5.0]]), T, T, np.array([[7.0, 7.0]]))
    np.testing.assert_array_equal(after.positions, [[7.0, 7.0]])
    np.testing.assert_array_equal(after.prev_displacements, [[1.0, 0.0]])  # retained
    nxt = advance_or_reposition(after, np.array([[1.0, 0.0]]), T + 1, T)
    np.testing.assert_array_equal(nxt.positions, [[8.0, 7.0]])
    np.testing.assert_array_equal(nxt.prev_displacements, [[1.0, 0.0]])


def test_schedule_violations():
    vf = VirtualFlock.from_positions(np.zeros((2, 2)))
    with pytest.raises(ScheduleError):
        advance_or_reposition(vf, np.zeros((2, 2)), 11, 10, np.ones((2, 2)))
    with pytest.raises(ScheduleError):
        advance_or_reposition(vf, np.zeros((2, 2)), 20, 10)


def test_zero_lag_snaps_then_advances():
    T = 10
    vf = VirtualFlock(np.array([[50.0, 50.0]]), np.array([[0.0, 0.0]]))
    snapped = snap_to(vf, np.array([[7.0, 7.0]]))
    np.testing.assert_array_equal(snapped.positions, [[7.0, 7.0]])
    nxt = advance_or_reposition(snapped, np.array([[1.0, 2.0]]), T, T, mode=RepositionMode.ZERO_LAG)
    np.testing.assert_array_equal(nxt.positions, [[8.0, 9.0]])


def _normal_flock(seed, n=12):
    rng = np.random.default_rng(seed)
    return rng.uniform(-25, 25, (n, 2)), rng.normal(0, 1, (n, 2))


def test_exact_model_equivalence_reference_path():
    """Synchronised twin with exact gains tracks the flock bit for bit."""
    T = 10
    x, v = _normal_flock(3)
    xd = np.array([-30.0, -50.0])
    gains = np.tile(PROFILE.gains, (len(x), 1))
    vgains = estimated_gains(PROFILE, BetaEstimate(), len(x))
    twin = snap_to(VirtualFlock(x.copy(), v.copy()), x)
    for k in range(T, 2 * T):
        vel = flock_displacements(x, v, gains, xd, R)
        ph = virtual_displacements(twin, xd, vgains, R)
        twin = advance_or_reposition(twin, ph, k, T, mode=RepositionMode.ZERO_LAG)
        x, v = x + vel, vel
        xd = xd + np.array([1.0, 1.5])
        np.testing.assert_array_equal(twin.positions, x)


def test_exact_model_equivalence_engine_kernel():
    x, v = _normal_flock(4)
    n = len(x)
    xi, phi = np.zeros_like(x), v.copy()
    xd = np.array([-30.0, -50.0])
    gains = np.tile(PROFILE.gains, (n, 1))
    kd = np.array([10.0, 200.0, 4.0])
    guided = np.ones(n, dtype=np.bool_)
    k, code = advance_block(
        x, v, xd, xi, phi, gains, gains.copy(), np.array([20.0, 20.0]), 15.0, guided, 0,
        10, 10000, 10, True, R, math.inf, kd, 1.0, 1.0, 0.0,
    )
    assert (k, code) == (20, 0)
    np.testing.assert_array_equal(xi, x)
    np.testing.assert_array_equal(phi, v)


def test_zero_lag_exact_trial_has_zero_prediction_error():
    cfg = TrialConfig(policy="FAT", reposition_mode="zero_lag", beta=BetaEstimate(), max_steps=300)
    assert run_trial(cfg).prediction_error == 0.0


def test_beta_monotone_degradation():
    exact, off = [], []
    for s in trial_seeds(7, 20):
        cfg = TrialConfig(policy="FAT", seed=s, max_steps=400)
        exact.append(run_trial(cfg.replace(beta=BetaEstimate())).prediction_error)
        off.append(run_trial(cfg.replace(beta=BetaEstimate(0.8, 0.8, 0.8, 0.8))).prediction_error)
    assert np.mean(off) > np.mean(exact)
