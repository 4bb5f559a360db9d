"""Independent hand-written evaluators used as test oracles.

Plain-Python, scalar arithmetic only; nothing here imports the package's
force code, so agreement with the kernels is a genuine cross-check.
"""

import math

EPS_DIST = 1e-9
EPS_NORM = 1e-12


def _norm(x, y):
    return math.sqrt(x * x + y * y)


def boid_velocity(pos, prev, gains, shepherd, radius):
    """Displacement of every sheep, written out term by term."""
    n = len(pos)
    out = []
    for i in range(n):
        xi, yi = pos[i]
        nb = [j for j in range(n) if j != i and _norm(pos[j][0] - xi, pos[j][1] - yi) <= radius]
        sep = [0.0, 0.0]
        ali = [0.0, 0.0]
        att = [0.0, 0.0]
        for j in nb:
            dx, dy = pos[j][0] - xi, pos[j][1] - yi
            r = max(_norm(dx, dy), EPS_DIST)
            sep[0] -= dx / r**3
            sep[1] -= dy / r**3
            att[0] += dx / r
            att[1] += dy / r
            vn = _norm(*prev[j])
            if vn >= EPS_NORM:
                ali[0] += prev[j][0] / vn
                ali[1] += prev[j][1] / vn
        if nb:
            sep = [c / len(nb) for c in sep]
            ali = [c / len(nb) for c in ali]
            att = [c / len(nb) for c in att]
        dx, dy = shepherd[0] - xi, shepherd[1] - yi
        r = max(_norm(dx, dy), EPS_DIST)
        rep = [-dx / r**3, -dy / r**3]
        g = gains[i]
        out.append(
            [
                g[0] * sep[0] + g[1] * ali[0] + g[2] * att[0] + g[3] * rep[0],
                g[0] * sep[1] + g[1] * ali[1] + g[2] * att[1] + g[3] * rep[1],
            ]
        )
    return out


def quantile_by_rank(values, p):
    """Fractional-rank quantile, computed without sorting helpers from the package."""
    xs = sorted(values)
    h = (len(xs) - 1) * p
    j = int(h)
    if j + 1 >= len(xs):
        return xs[-1]
    return xs[j] + (h - j) * (xs[j + 1] - xs[j])


class LedgerOracle:
    """Step-by-step bench/remove/re-include bookkeeping for one sheep."""

    def __init__(self, tau, h):
        self.tau, self.h = tau, h
        self.state = "active"
        self.strikes = 0
        self.last = None

    def observe(self, k, flagged):
        if self.state == "active" and flagged:
            self.strikes += 1
            self.last = k
            self.state = "removed" if self.strikes > self.tau else "benched"
        if self.state == "benched" and k - self.last >= self.h:
            self.state = "active"
        return self.state
