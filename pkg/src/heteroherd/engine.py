"""One shepherding trial, start to finish.

Per step ``k`` the engine (1) delivers the global observation when
``k % period == 0`` and, for the discriminating policies, scores every
sheep against its virtual twin and refreshes the guided set and target;
(2) checks termination; (3) computes the shepherd, sheep and virtual-sheep
displacements from the time-k state; (4) commits them together.
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Iterable

import numpy as np

from ._kernels import GOAL_REACHED, MAX_STEPS, NON_FINITE, advance_block
from .discrimination import (
    DiscriminationConfig,
    DiscriminationEvent,
    Ledger,
    ThresholdMode,
    discriminate,
)
from .dynamics import FloatArray, ForceProfile, VariantAlpha, coerce_floats, gain_table
from .shepherd import ShepherdGains, SignConvention, refresh_target
from .virtual import BetaEstimate, RepositionMode, VirtualFlock, estimated_gains

log = logging.getLogger(__name__)


class Policy(str, enum.Enum):
    FAT = "FAT"
    STATIC = "Static"
    DYNAMIC = "Dynamic"

    @property
    def threshold_mode(self) -> ThresholdMode | None:
        return {Policy.STATIC: ThresholdMode.STATIC, Policy.DYNAMIC: ThresholdMode.DYNAMIC}.get(self)


class Termination(str, enum.Enum):
    GOAL_REACHED = "GoalReached"
    GUIDED_SET_EMPTY = "GuidedSetEmpty"
    MAX_STEPS = "MaxSteps"
    NON_FINITE = "NonFinite"


@dataclass(frozen=True)
class TrialConfig:
    n_sheep: int = 20
    n_variant: int = 0
    alpha: VariantAlpha = VariantAlpha(1, 0, 0, 0)
    beta: BetaEstimate | None = None
    normal_profile: ForceProfile = ForceProfile()
    shepherd_gains: ShepherdGains = ShepherdGains()
    policy: Policy = Policy.STATIC
    discrimination: DiscriminationConfig = DiscriminationConfig()
    goal_center: tuple[float, float] = (20.0, 20.0)
    goal_radius: float = 15.0
    spawn_radius: float = 60.0
    shepherd_start: tuple[float, float] = (-30.0, -50.0)
    max_steps: int = 10000
    seed: int = 0
    reposition_mode: RepositionMode = RepositionMode.AS_PUBLISHED
    sign_convention: SignConvention = SignConvention.LABEL_FAITHFUL
    # exploratory knobs, off by default
    max_step_norm: float | None = None
    step_scale: float = 1.0
    repulsion_range: float = math.inf
    record_trajectory: bool = False

    def __post_init__(self) -> None:
        coerce_floats(self)
        for name in ("goal_center", "shepherd_start"):
            object.__setattr__(self, name, tuple(float(c) for c in getattr(self, name)))
        object.__setattr__(self, "alpha", VariantAlpha.parse(self.alpha))
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "reposition_mode", RepositionMode(self.reposition_mode))
        object.__setattr__(self, "sign_convention", SignConvention(self.sign_convention))
        if self.max_step_norm is not None:
            object.__setattr__(self, "max_step_norm", float(self.max_step_norm))
        if self.n_sheep < 1:
            raise ValueError("n_sheep must be at least 1")
        if not 0 <= self.n_variant <= self.n_sheep:
            raise ValueError("n_variant must satisfy 0 <= n_variant <= n_sheep")
        if not self.goal_radius > 0:
            raise ValueError("goal_radius must be positive")
        if not self.spawn_radius > 0:
            raise ValueError("spawn_radius must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")
        if not self.step_scale > 0:
            raise ValueError("step_scale must be positive")
        if self.max_step_norm is not None and not self.max_step_norm > 0:
            raise ValueError("max_step_norm must be positive when set")
        if not self.repulsion_range > 0:
            raise ValueError("repulsion_range must be positive")
        if self.n_variant and VariantAlpha.parse(self.alpha).is_trivial:
            raise ValueError("variant alpha must not be all ones or all zeros")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def resolved_beta(self) -> BetaEstimate:
        return self.beta if self.beta is not None else BetaEstimate.from_alpha(self.alpha)

    @property
    def resolved_discrimination(self) -> DiscriminationConfig:
        mode = Policy(self.policy).threshold_mode
        if mode is None:
            return self.discrimination
        return dataclasses.replace(self.discrimination, mode=mode)

    def replace(self, **changes: Any) -> TrialConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return _plain(dataclasses.asdict(self) | {"beta": dataclasses.asdict(self.resolved_beta)})

    def config_hash(self, include_seed: bool = False) -> str:
        d = self.to_dict()
        d.pop("record_trajectory")
        if not include_seed:
            d.pop("seed")
        return stable_hash(d)


def _plain(obj: Any) -> Any:
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    return obj


def stable_hash(obj: Any) -> str:
    blob = json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class InitialState:
    positions: FloatArray
    shepherd: FloatArray
    virtual: VirtualFlock
    ledger: Ledger

    @property
    def spawn_hash(self) -> str:
        return hashlib.sha256(self.positions.tobytes()).hexdigest()[:16]


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream for one trial."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def uniform_disk(rng: np.random.Generator, n: int, radius: float) -> FloatArray:
    u = rng.random((n, 2))
    r = radius * np.sqrt(u[:, 0])
    theta = 2.0 * np.pi * u[:, 1]
    return np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def spawn_initial(cfg: TrialConfig, rng: np.random.Generator | None = None) -> InitialState:
    rng = make_rng(cfg.seed) if rng is None else rng
    x = uniform_disk(rng, cfg.n_sheep, cfg.spawn_radius)
    return InitialState(
        positions=x,
        shepherd=np.array(cfg.shepherd_start, dtype=np.float64),
        virtual=VirtualFlock.from_positions(x),
        ledger=Ledger.initial(cfg.n_sheep),
    )


@dataclass
class TrialResult:
    terminated_step: int
    terminated_by: Termination
    normal_in_goal: int
    success_fraction: float
    misjudgement_count: int
    events: list[DiscriminationEvent] = field(default_factory=list)
    spawn_hash: str = ""
    trajectory: list[tuple[int, int, str, float, float]] | None = None
    diagnostic: str | None = None
    prediction_error: float = 0.0  # mean over observations of max_i |x_i - xi_i|
    final_positions: FloatArray | None = None
    ledger: Ledger | None = None

    @property
    def flag_thresholds(self) -> list[float]:
        return [e.threshold for e in self.events if e.action.is_flag]

    def to_record(self, cfg: TrialConfig) -> dict[str, Any]:
        flags = self.flag_thresholds
        return {
            "config_hash": cfg.config_hash(),
            "seed": cfg.seed,
            "policy": Policy(cfg.policy).value,
            "alpha": str(VariantAlpha(*cfg.alpha)),
            "n_sheep": cfg.n_sheep,
            "n_variant": cfg.n_variant,
            "terminated_step": self.terminated_step,
            "terminated_by": self.terminated_by.value,
            "normal_in_goal": self.normal_in_goal,
            "success_fraction": self.success_fraction,
            "misjudgement_count": self.misjudgement_count,
            "misjudged_sheep": count_misjudged_sheep(self.events),
            "n_flags": len(flags),
            "flag_threshold_sum": float(sum(flags)),
            "spawn_hash": self.spawn_hash,
            "prediction_error": self.prediction_error,
            "diagnostic": self.diagnostic,
        }


def count_misjudgements(events: Iterable[DiscriminationEvent]) -> int:
    """Flag events (bench or remove) raised against ground-truth normal sheep."""
    return sum(1 for e in events if e.action.is_flag and e.is_variant is False)


def count_misjudged_sheep(events: Iterable[DiscriminationEvent]) -> int:
    """Distinct normal sheep flagged at least once."""
    return len({e.sheep for e in events if e.action.is_flag and e.is_variant is False})


def _snapshot(k, x, xd, target, n_normal):
    rows = [(k, i, "normal" if i < n_normal else "variant", float(p[0]), float(p[1])) for i, p in enumerate(x)]
    rows.append((k, -1, "shepherd", float(xd[0]), float(xd[1])))
    if target >= 0:
        rows.append((k, target, "target", float(x[target, 0]), float(x[target, 1])))
    return rows


def run_trial(cfg: TrialConfig, initial: InitialState | None = None) -> TrialResult:
    """Simulate one trial until goal, empty guided set, blow-up or step budget."""
    init = spawn_initial(cfg) if initial is None else initial
    n, m = cfg.n_sheep, cfg.n_variant
    n_normal = n - m
    policy = Policy(cfg.policy)
    dcfg = cfg.resolved_discrimination
    period = dcfg.period
    radius = cfg.normal_profile.perception_radius
    goal = np.array(cfg.goal_center, dtype=np.float64)
    goal_r = cfg.goal_radius
    dt = cfg.step_scale
    reach = cfg.repulsion_range

    gains = gain_table(cfg.normal_profile, n, m, cfg.alpha)
    vgains = estimated_gains(cfg.normal_profile, cfg.resolved_beta, n)
    is_variant = np.arange(n) >= n_normal

    x = init.positions.copy()
    v = np.zeros_like(x)
    xd = init.shepherd.copy()
    virt = init.virtual.copy()
    ledger = init.ledger
    guided = np.array(ledger.guided(), dtype=np.intp)
    target = -1
    events: list[DiscriminationEvent] = []
    traj: list | None = [] if cfg.record_trajectory else None
    errors: list[float] = []

    def finish(k: int, how: Termination, diag: str | None = None) -> TrialResult:
        if traj is not None and (not traj or traj[-1][0] != k) and how is not Termination.NON_FINITE:
            shown = -1 if how is Termination.GUIDED_SET_EMPTY else target
            traj.extend(_snapshot(k, x, xd, shown, n_normal))
        if how is Termination.NON_FINITE:
            in_goal = 0
        else:
            in_goal = int(np.count_nonzero(np.hypot(*(x[:n_normal] - goal).T) < goal_r))
        return TrialResult(
            terminated_step=k,
            terminated_by=how,
            normal_in_goal=in_goal,
            success_fraction=in_goal / n_normal if n_normal else 1.0,
            misjudgement_count=count_misjudgements(events),
            events=events,
            spawn_hash=init.spawn_hash,
            trajectory=traj,
            diagnostic=diag,
            prediction_error=float(np.mean(errors)) if errors else 0.0,
            final_positions=x.copy(),
            ledger=ledger,
        )

    guided_mask = np.zeros(n, dtype=np.bool_)
    guided_mask[guided] = True
    xi = virt.positions
    phi = virt.prev_displacements
    kd = np.array([cfg.shepherd_gains.attraction, cfg.shepherd_gains.separation, cfg.shepherd_gains.goal_repulsion])
    sign = -1.0 if SignConvention(cfg.sign_convention) is SignConvention.VERBATIM else 1.0
    cap = 0.0 if cfg.max_step_norm is None else float(cfg.max_step_norm)
    zero_lag = RepositionMode(cfg.reposition_mode) is RepositionMode.ZERO_LAG

    k = 0
    while True:
        # k is an observation step here
        if k > 0:
            dist = np.hypot(*(x - xi).T)
            errors.append(float(dist.max()))
        if k > 0 and policy is not Policy.FAT:
            ledger, new = discriminate(ledger, dist.tolist(), k, dcfg, is_variant.tolist())
            events.extend(new)
            guided = np.array(ledger.guided(), dtype=np.intp)
            guided_mask[:] = False
            guided_mask[guided] = True
        if guided.size == 0:
            return finish(k, Termination.GUIDED_SET_EMPTY)
        target = refresh_target(x, guided, goal)
        if traj is not None:
            traj.extend(_snapshot(k, x, xd, target, n_normal))
        k, code = advance_block(
            x, v, xd, xi, phi, gains, vgains, goal, goal_r, guided_mask, target,
            k, cfg.max_steps, period, zero_lag, radius, reach, kd, sign, dt, cap,
        )
        if code == GOAL_REACHED:
            return finish(k, Termination.GOAL_REACHED)
        if code == MAX_STEPS:
            return finish(k, Termination.MAX_STEPS)
        if code == NON_FINITE:
            log.warning("trial seed=%d aborted: non-finite state at step %d", cfg.seed, k)
            return finish(k, Termination.NON_FINITE, f"non-finite state at step {k}")

    raise AssertionError("unreachable")  # pragma: no cover


def write_trajectory_csv(rows: Iterable[tuple], path, config_hash: str) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config_hash}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["step", "agent", "kind", "x", "y"])
        for step, agent, kind, px, py in rows:
            w.writerow([step, agent, kind, repr(px), repr(py)])


def read_trajectory_csv(path) -> tuple[str | None, list[tuple[int, int, str, float, float]]]:
    import csv

    rows = []
    chash = None
    with open(path, newline="") as fh:
        first = fh.readline()
        if first.startswith("# config_hash="):
            chash = first.strip().split("=", 1)[1]
        else:
            fh.seek(0)
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["step", "agent", "kind", "x", "y"]:
            raise ValueError(f"{path}: not a trajectory file (columns {reader.fieldnames})")
        for r in reader:
            rows.append((int(r["step"]), int(r["agent"]), r["kind"], float(r["x"]), float(r["y"])))
    return chash, rows
