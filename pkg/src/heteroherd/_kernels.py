"""Compiled inner loops.

These mirror the reference functions in :mod:`dynamics`, :mod:`shepherd`
and :mod:`virtual`; the test-suite checks them against each other.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EPS_DIST = 1e-9
EPS_NORM = 1e-12

CONTINUE = 0
GOAL_REACHED = 1
MAX_STEPS = 2
NON_FINITE = 3


@njit(cache=True)
def flock_kernel(pos, prev, gains, shepherd, radius, repulsion_range, out):
    n = pos.shape[0]
    for i in range(n):
        s1x = s1y = s2x = s2y = s3x = s3y = 0.0
        count = 0
        for j in range(n):
            if j == i:
                continue
            dx = pos[j, 0] - pos[i, 0]
            dy = pos[j, 1] - pos[i, 1]
            r = math.sqrt(dx * dx + dy * dy)
            if r <= radius:
                count += 1
                r = max(r, EPS_DIST)
                r3 = r * r * r
                s1x += dx / r3
                s1y += dy / r3
                s3x += dx / r
                s3y += dy / r
                vn = math.sqrt(prev[j, 0] * prev[j, 0] + prev[j, 1] * prev[j, 1])
                if vn >= EPS_NORM:
                    s2x += prev[j, 0] / vn
                    s2y += prev[j, 1] / vn
        ox = 0.0
        oy = 0.0
        if count > 0:
            ox = gains[i, 0] * (-s1x / count) + gains[i, 1] * (s2x / count) + gains[i, 2] * (s3x / count)
            oy = gains[i, 0] * (-s1y / count) + gains[i, 1] * (s2y / count) + gains[i, 2] * (s3y / count)
        dx = shepherd[0] - pos[i, 0]
        dy = shepherd[1] - pos[i, 1]
        r = max(math.sqrt(dx * dx + dy * dy), EPS_DIST)
        if r <= repulsion_range:
            r3 = r * r * r
            ox += gains[i, 3] * (-dx / r3)
            oy += gains[i, 3] * (-dy / r3)
        out[i, 0] = ox
        out[i, 1] = oy


@njit(cache=True)
def nearest_index(shepherd, pos):
    best = np.inf
    idx = 0
    for i in range(pos.shape[0]):
        dx = pos[i, 0] - shepherd[0]
        dy = pos[i, 1] - shepherd[1]
        d = math.sqrt(dx * dx + dy * dy)
        if d < best:
            best = d
            idx = i
    return idx


@njit(cache=True)
def shepherd_kernel(xd, xt, xn, goal, kd, sign, out):
    ax = xt[0] - xd[0]
    ay = xt[1] - xd[1]
    ra = max(math.sqrt(ax * ax + ay * ay), EPS_DIST)
    bx = xn[0] - xd[0]
    by = xn[1] - xd[1]
    rb = max(math.sqrt(bx * bx + by * by), EPS_DIST)
    rb3 = rb * rb * rb
    cx = xd[0] - goal[0]
    cy = xd[1] - goal[1]
    rc = max(math.sqrt(cx * cx + cy * cy), EPS_DIST)
    out[0] = sign * (kd[0] * (ax / ra) + kd[1] * (-bx / rb3) + kd[2] * (cx / rc))
    out[1] = sign * (kd[0] * (ay / ra) + kd[1] * (-by / rb3) + kd[2] * (cy / rc))


@njit(cache=True)
def _cap_rows(a, limit):
    for i in range(a.shape[0]):
        n = math.sqrt(a[i, 0] * a[i, 0] + a[i, 1] * a[i, 1])
        if n > limit:
            a[i, 0] *= limit / n
            a[i, 1] *= limit / n


@njit(cache=True)
def advance_block(
    x, v, xd, xi, phi, gains, vgains, goal, goal_r, guided, target,
    k0, max_steps, period, zero_lag, radius, repulsion_range, kd, sign, dt, cap,
):
    """Run steps ``k0 .. k0 + period - 1`` in place with a fixed target.

    ``k0`` is an observation step.  Returns ``(k, code)``: the step at which
    the block stopped and why (``CONTINUE`` means ``k = k0 + period`` is the
    next observation).
    """
    n = x.shape[0]
    vel = np.empty_like(x)
    ph = np.empty_like(x)
    vd = np.empty(2)
    for k in range(k0, k0 + period):
        done = True
        for i in range(n):
            if guided[i]:
                dx = x[i, 0] - goal[0]
                dy = x[i, 1] - goal[1]
                if not math.sqrt(dx * dx + dy * dy) < goal_r:
                    done = False
                    break
        if done:
            return k, GOAL_REACHED
        if k == max_steps:
            return k, MAX_STEPS

        near = nearest_index(xd, x)
        shepherd_kernel(xd, x[target], x[near], goal, kd, sign, vd)
        flock_kernel(x, v, gains, xd, radius, repulsion_range, vel)
        if k == k0 and zero_lag:
            xi[:, :] = x
        flock_kernel(xi, phi, vgains, xd, radius, repulsion_range, ph)
        if dt != 1.0:
            vd *= dt
            vel *= dt
            ph *= dt
        if cap > 0.0:
            _cap_rows(vel, cap)
            _cap_rows(ph, cap)
            nv = math.sqrt(vd[0] * vd[0] + vd[1] * vd[1])
            if nv > cap:
                vd *= cap / nv

        if k == k0 and not zero_lag:
            xi[:, :] = x
        else:
            xi += ph
            phi[:, :] = ph
        x += vel
        v[:, :] = vel
        xd += vd

        ok = math.isfinite(xd[0]) and math.isfinite(xd[1])
        for i in range(n):
            if not (math.isfinite(x[i, 0]) and math.isfinite(x[i, 1])
                    and math.isfinite(xi[i, 0]) and math.isfinite(xi[i, 1])):
                ok = False
        if not ok:
            return k + 1, NON_FINITE
    return k0 + period, CONTINUE
