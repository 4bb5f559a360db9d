"""Farthest-agent targeting for the shepherd.

The shepherd is pulled toward its target sheep, pushed away from the sheep
nearest to it, and pushed away from the goal.  ``SignConvention.VERBATIM``
flips all three terms, which is how the movement equations read when taken
literally; the default follows the named behaviour of each term.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import EPS_DIST, FloatArray, coerce_floats


class SignConvention(str, enum.Enum):
    LABEL_FAITHFUL = "LabelFaithful"
    VERBATIM = "Verbatim"


@dataclass(frozen=True)
class ShepherdGains:
    attraction: float = 10.0
    separation: float = 200.0
    goal_repulsion: float = 4.0

    def __post_init__(self) -> None:
        coerce_floats(self)
        if not all(g > 0 for g in (self.attraction, self.separation, self.goal_repulsion)):
            raise ValueError("shepherd gains must be positive")


@dataclass
class ShepherdState:
    position: FloatArray
    target: int = -1


def nearest_sheep(shepherd_position: FloatArray, positions: FloatArray) -> int:
    """Index of the sheep closest to the shepherd; lowest index on ties."""
    d = np.hypot(*(np.asarray(positions) - shepherd_position).T)
    return int(np.argmin(d))


def refresh_target(positions: FloatArray, guided: Sequence[int], goal: FloatArray) -> int:
    """Guided sheep farthest from the goal; lowest index on ties."""
    if len(guided) == 0:
        raise ValueError("no guided sheep to target")
    idx = np.sort(np.asarray(guided, dtype=np.intp))
    d = np.hypot(*(np.asarray(positions)[idx] - goal).T)
    return int(idx[int(np.argmax(d))])


def shepherd_terms(
    position: FloatArray,
    target_position: FloatArray,
    nearest_position: FloatArray,
    goal: FloatArray,
) -> tuple[FloatArray, FloatArray, FloatArray]:
    """Unit pull to the target, inverse-square push off the nearest sheep,
    unit push off the goal."""
    to_t = np.asarray(target_position, float) - position
    v1 = to_t / max(math.hypot(*to_t), EPS_DIST)
    to_n = np.asarray(nearest_position, float) - position
    v2 = -to_n / max(math.hypot(*to_n), EPS_DIST) ** 3
    off_g = position - np.asarray(goal, float)
    v3 = off_g / max(math.hypot(*off_g), EPS_DIST)
    return v1, v2, v3


def shepherd_step(
    position: FloatArray,
    target_position: FloatArray,
    nearest_position: FloatArray,
    goal: FloatArray,
    gains: ShepherdGains = ShepherdGains(),
    convention: SignConvention = SignConvention.LABEL_FAITHFUL,
) -> FloatArray:
    """Shepherd displacement ``v_d(k)``."""
    position = np.asarray(position, float)
    v1, v2, v3 = shepherd_terms(position, target_position, nearest_position, goal)
    vd = gains.attraction * v1 + gains.separation * v2 + gains.goal_repulsion * v3
    if SignConvention(convention) is SignConvention.VERBATIM:
        return -vd
    return vd
