"""The shepherd's predictive twin of the flock.

One virtual sheep per actual sheep, moved with the shepherd's (possibly
wrong) estimate of the normal gains and snapped back onto the observed
positions at every global observation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import FloatArray, ForceProfile, coerce_floats, flock_displacements, sheep_step


class ScheduleError(RuntimeError):
    """Raised when an observation-only action is requested off-period."""


class RepositionMode(str, enum.Enum):
    AS_PUBLISHED = "as_published"
    ZERO_LAG = "zero_lag"


@dataclass(frozen=True)
class BetaEstimate:
    """Multipliers applied to the normal gains to form the shepherd's model."""

    separation: float = 1.0
    alignment: float = 1.0
    attraction: float = 1.0
    repulsion: float = 1.0

    def __post_init__(self) -> None:
        coerce_floats(self)
        if not all(b > 0 for b in self.as_tuple()):
            raise ValueError("beta entries must be strictly positive")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.separation, self.alignment, self.attraction, self.repulsion)

    @classmethod
    def from_alpha(cls, alpha: Sequence[int], mismatch: float = 0.9) -> BetaEstimate:
        """Exact for the forces the variant feels, ``mismatch`` for the rest."""
        return cls(*(1.0 if a else mismatch for a in alpha))


@dataclass
class VirtualFlock:
    positions: FloatArray
    prev_displacements: FloatArray

    @classmethod
    def from_positions(cls, positions: FloatArray) -> VirtualFlock:
        p = np.array(positions, dtype=np.float64)
        return cls(p, np.zeros_like(p))

    def copy(self) -> VirtualFlock:
        return VirtualFlock(self.positions.copy(), self.prev_displacements.copy())


def estimated_gains(normal: ForceProfile, beta: BetaEstimate, n_sheep: int) -> FloatArray:
    return np.tile(normal.scaled(beta.as_tuple()).gains, (n_sheep, 1))


def virtual_step(
    flock: VirtualFlock,
    shepherd_position: FloatArray,
    beta: BetaEstimate,
    normal_profile: ForceProfile,
    i: int,
    repulsion_range: float = math.inf,
) -> FloatArray:
    """Predicted displacement of virtual sheep ``i`` (reference, one agent)."""
    gains = normal_profile.scaled(beta.as_tuple()).gains
    return sheep_step(
        flock.positions,
        flock.prev_displacements,
        gains,
        shepherd_position,
        i,
        normal_profile.perception_radius,
        repulsion_range,
    )


def virtual_displacements(
    flock: VirtualFlock,
    shepherd_position: FloatArray,
    gains: FloatArray,
    radius: float,
    repulsion_range: float = math.inf,
) -> FloatArray:
    return flock_displacements(
        flock.positions, flock.prev_displacements, gains, shepherd_position, radius, repulsion_range
    )


def advance_or_reposition(
    flock: VirtualFlock,
    displacements: FloatArray,
    k: int,
    period: int,
    actual_positions: FloatArray | None = None,
    mode: RepositionMode = RepositionMode.AS_PUBLISHED,
) -> VirtualFlock:
    """State at ``k + 1`` from the state and predicted displacements at ``k``.

    As published, an observation step (``k % period == 0``) moves every
    virtual sheep onto ``actual_positions`` and keeps its previous
    displacement; any other step advances by ``displacements``.  In zero-lag
    mode the snap has already happened at ``k`` (see :func:`snap_to`), so
    every step advances.  Supplying actual positions off-period is a
    schedule violation.
    """
    on_period = k % period == 0
    if actual_positions is not None and not on_period:
        raise ScheduleError(f"reposition requested at k={k}, period {period}")
    if on_period and RepositionMode(mode) is RepositionMode.AS_PUBLISHED:
        if actual_positions is None:
            raise ScheduleError(f"observation step k={k} needs actual positions")
        return VirtualFlock(
            np.array(actual_positions, dtype=np.float64), flock.prev_displacements.copy()
        )
    return VirtualFlock(flock.positions + displacements, np.array(displacements, dtype=np.float64))


def snap_to(flock: VirtualFlock, actual_positions: FloatArray) -> VirtualFlock:
    """Zero-lag reposition at the observation instant itself."""
    return VirtualFlock(np.array(actual_positions, dtype=np.float64), flock.prev_displacements.copy())
