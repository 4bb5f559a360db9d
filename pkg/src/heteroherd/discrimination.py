"""Deciding which sheep the shepherd keeps guiding.

At every observation instant each sheep's prediction error (distance to
its virtual twin) is compared with a threshold.  An active sheep above the
threshold takes a strike and is benched; ``strike_limit + 1`` strikes remove
it for good.  A benched sheep is re-admitted once ``reinclusion_delay``
steps have passed since its last strike.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

from .dynamics import coerce_floats
from .virtual import ScheduleError


class ThresholdMode(str, enum.Enum):
    STATIC = "Static"
    DYNAMIC = "Dynamic"


class Status(enum.IntEnum):
    ACTIVE = 0
    BENCHED = 1
    REMOVED = 2


class Action(str, enum.Enum):
    BENCH = "bench"
    REMOVE = "remove"
    REINCLUDE = "reinclude"

    @property
    def is_flag(self) -> bool:
        return self is not Action.REINCLUDE


@dataclass(frozen=True)
class DiscriminationConfig:
    mode: ThresholdMode = ThresholdMode.STATIC
    static_threshold: float = 5.0
    strike_limit: int = 5
    reinclusion_delay: int = 20
    period: int = 10

    def __post_init__(self) -> None:
        coerce_floats(self)
        if not self.static_threshold > 0:
            raise ValueError("static_threshold must be positive")
        if self.strike_limit < 0:
            raise ValueError("strike_limit must be non-negative")
        if self.reinclusion_delay < 1 or self.period < 1:
            raise ValueError("reinclusion_delay and period must be positive")


@dataclass(frozen=True)
class DiscriminationEvent:
    step: int
    sheep: int
    distance: float
    threshold: float
    action: Action
    is_variant: bool | None = None

    def as_dict(self) -> dict:
        return {
            "step": self.step,
            "sheep": self.sheep,
            "distance": self.distance,
            "threshold": self.threshold,
            "action": self.action.value,
            "is_variant": self.is_variant,
        }


@dataclass(frozen=True)
class Ledger:
    """Per-sheep status, strike count and step of the last strike (-1: none)."""

    status: tuple[Status, ...]
    strikes: tuple[int, ...]
    last_flag: tuple[int, ...]

    @classmethod
    def initial(cls, n_sheep: int) -> Ledger:
        return cls((Status.ACTIVE,) * n_sheep, (0,) * n_sheep, (-1,) * n_sheep)

    def __len__(self) -> int:
        return len(self.status)

    def guided(self) -> list[int]:
        return [i for i, s in enumerate(self.status) if s is Status.ACTIVE]


def quantile(values: Sequence[float], p: float) -> float:
    """Linear-interpolation quantile at fractional rank ``p * (n - 1)``."""
    xs = sorted(values)
    if not xs:
        raise ValueError("quantile of an empty sample")
    pos = p * (len(xs) - 1)
    lo = math.floor(pos)
    hi = min(lo + 1, len(xs) - 1)
    frac = pos - lo
    return xs[lo] + (xs[hi] - xs[lo]) * frac


def dynamic_threshold(distances: Sequence[float], whisker: float = 1.5) -> float:
    """Upper Tukey fence ``q3 + whisker * (q3 - q1)`` of the distances."""
    q1 = quantile(distances, 0.25)
    q3 = quantile(distances, 0.75)
    return q3 + whisker * (q3 - q1)


def threshold_for(distances: Sequence[float], cfg: DiscriminationConfig) -> float:
    if ThresholdMode(cfg.mode) is ThresholdMode.DYNAMIC:
        return dynamic_threshold(distances)
    return cfg.static_threshold


def discriminate(
    ledger: Ledger,
    distances: Sequence[float],
    k: int,
    cfg: DiscriminationConfig,
    is_variant: Sequence[bool] | None = None,
) -> tuple[Ledger, list[DiscriminationEvent]]:
    """One observation-instant update of the ledger.

    All strikes are decided before any re-inclusion, so a sheep benched at
    ``k`` cannot be re-admitted at ``k``.  Benched and removed sheep take
    no strikes, but their distances still enter the dynamic threshold.
    """
    if k <= 0 or k % cfg.period:
        raise ScheduleError(f"discrimination at k={k} is off the period-{cfg.period} schedule")
    if len(distances) != len(ledger):
        raise ValueError("one distance per sheep is required")
    limit = threshold_for(distances, cfg)
    status = list(ledger.status)
    strikes = list(ledger.strikes)
    last = list(ledger.last_flag)
    truth = (lambda i: None) if is_variant is None else (lambda i: bool(is_variant[i]))
    events: list[DiscriminationEvent] = []

    for i, d in enumerate(distances):
        if status[i] is Status.ACTIVE and d > limit:
            strikes[i] += 1
            if strikes[i] >= cfg.strike_limit + 1:
                status[i] = Status.REMOVED
                action = Action.REMOVE
            else:
                status[i] = Status.BENCHED
                action = Action.BENCH
            last[i] = k
            events.append(DiscriminationEvent(k, i, float(d), float(limit), action, truth(i)))

    for i in range(len(status)):
        if status[i] is Status.BENCHED and k - last[i] >= cfg.reinclusion_delay:
            status[i] = Status.ACTIVE
            events.append(
                DiscriminationEvent(k, i, float(distances[i]), float(limit), Action.REINCLUDE, truth(i))
            )

    return Ledger(tuple(status), tuple(strikes), tuple(last)), events
