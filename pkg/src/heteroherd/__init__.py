"""Shepherding a heterogeneous flock with model-based discrimination."""

from .discrimination import (
    Action,
    DiscriminationConfig,
    DiscriminationEvent,
    Ledger,
    Status,
    ThresholdMode,
    discriminate,
    dynamic_threshold,
)
from .dynamics import NONTRIVIAL_ALPHAS, ForceProfile, VariantAlpha
from .engine import (
    Policy,
    Termination,
    TrialConfig,
    TrialResult,
    count_misjudgements,
    run_trial,
    spawn_initial,
)
from .shepherd import ShepherdGains, SignConvention
from .virtual import BetaEstimate, RepositionMode

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BetaEstimate",
    "DiscriminationConfig",
    "DiscriminationEvent",
    "ForceProfile",
    "Ledger",
    "NONTRIVIAL_ALPHAS",
    "Policy",
    "RepositionMode",
    "ShepherdGains",
    "SignConvention",
    "Status",
    "Termination",
    "ThresholdMode",
    "TrialConfig",
    "TrialResult",
    "VariantAlpha",
    "count_misjudgements",
    "discriminate",
    "dynamic_threshold",
    "run_trial",
    "spawn_initial",
]
