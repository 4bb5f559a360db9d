"""Config files for single trials and sweeps.

Both JSON and YAML are accepted.  Every key is optional; missing keys take
the package defaults, unknown keys are errors.  Error messages name the
offending key path, e.g. ``base.discrimination.strike_limit``.

Trial config keys (nested blocks in brackets)::

    n_sheep  n_variant  alpha  beta  policy  goal_center  goal_radius
    spawn_radius  shepherd_start  max_steps  seed  reposition_mode
    sign_convention  max_step_norm  step_scale  repulsion_range
    record_trajectory
    [normal_profile]  separation alignment attraction repulsion perception_radius
    [shepherd_gains]  attraction separation goal_repulsion
    [discrimination]  static_threshold strike_limit reinclusion_delay period

``alpha`` is a 4-list of 0/1 or a string such as ``"1010"``; ``beta`` is a
4-list, a mapping, or null (derived from alpha).

Sweep spec keys::

    preset (full | desk)  alphas ("all" or a list)  m_values  policies
    trials_per_cell  master_seed  beta_mismatch  derive_beta  base
"""

from __future__ import annotations

import dataclasses
import json
import math
from pathlib import Path
from typing import Any, Mapping

import yaml

from .discrimination import DiscriminationConfig
from .dynamics import NONTRIVIAL_ALPHAS, ForceProfile, VariantAlpha
from .engine import Policy, TrialConfig
from .experiment import ACCEPTANCE_M_VALUES, DESK_SCALE_TRIALS, SweepSpec
from .shepherd import ShepherdGains, SignConvention
from .virtual import BetaEstimate, RepositionMode


class ConfigError(ValueError):
    """Malformed, out-of-range or unknown config entry."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path or '<root>'}: {message}")


def load_document(path: str | Path) -> dict[str, Any]:
    """Read a JSON or YAML mapping from ``path`` (empty file -> ``{}``)."""
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(str(p), f"cannot read file ({exc.strerror})") from exc
    try:
        if p.suffix.lower() == ".json":
            doc = json.loads(text) if text.strip() else {}
        else:
            doc = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(str(p), f"parse error: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(str(p), "top level must be a mapping")
    return doc


def _join(prefix: str, key: str) -> str:
    return f"{prefix}.{key}" if prefix else key


def _check_keys(doc: Mapping[str, Any], allowed: set[str], where: str) -> None:
    if not isinstance(doc, Mapping):
        raise ConfigError(where, "expected a mapping")
    for key in doc:
        if key not in allowed:
            raise ConfigError(_join(where, str(key)), f"unknown key (allowed: {', '.join(sorted(allowed))})")


def _number(value: Any, where: str, *, integer: bool = False) -> float | int:
    if isinstance(value, bool):
        raise ConfigError(where, "expected a number, got a boolean")
    if integer:
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if not isinstance(value, int):
            raise ConfigError(where, f"expected an integer, got {value!r}")
        return value
    if isinstance(value, str) and value.strip().lower() in ("inf", "infinity"):
        return math.inf
    if not isinstance(value, (int, float)):
        raise ConfigError(where, f"expected a number, got {value!r}")
    return float(value)


def _vec2(value: Any, where: str) -> tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ConfigError(where, "expected a 2-element list")
    return (_number(value[0], f"{where}[0]"), _number(value[1], f"{where}[1]"))


def _enum(cls, value: Any, where: str):
    try:
        return cls(value)
    except ValueError:
        raise ConfigError(where, f"expected one of {[m.value for m in cls]}, got {value!r}") from None


def parse_alpha(value: Any, where: str = "alpha") -> VariantAlpha:
    if isinstance(value, str):
        value = list(value.strip())
    try:
        return VariantAlpha.parse(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(where, str(exc)) from None


def _block(cls, doc: Any, where: str, ints: tuple[str, ...] = ()):
    names = {f.name for f in dataclasses.fields(cls)}
    if doc is None:
        doc = {}
    _check_keys(doc, names, where)
    kwargs = {k: _number(v, _join(where, k), integer=k in ints) for k, v in doc.items()}
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def _beta(value: Any, where: str) -> BetaEstimate | None:
    if value is None:
        return None
    if isinstance(value, Mapping):
        return _block(BetaEstimate, value, where)
    if isinstance(value, (list, tuple)) and len(value) == 4:
        try:
            return BetaEstimate(*(_number(b, f"{where}[{i}]") for i, b in enumerate(value)))
        except ValueError as exc:
            raise ConfigError(where, str(exc)) from None
    raise ConfigError(where, "expected null, a 4-list or a mapping")


TRIAL_KEYS = {f.name for f in dataclasses.fields(TrialConfig)}


def parse_trial_config(doc: Mapping[str, Any] | None = None, where: str = "") -> TrialConfig:
    """Resolve a (possibly empty) mapping into a validated :class:`TrialConfig`."""
    doc = {} if doc is None else doc
    _check_keys(doc, TRIAL_KEYS, where)
    kw: dict[str, Any] = {}
    for key, value in doc.items():
        here = _join(where, key)
        if key in ("n_sheep", "n_variant", "max_steps", "seed"):
            kw[key] = _number(value, here, integer=True)
        elif key in ("goal_radius", "spawn_radius", "step_scale", "repulsion_range"):
            kw[key] = _number(value, here)
        elif key == "max_step_norm":
            kw[key] = None if value is None else _number(value, here)
        elif key in ("goal_center", "shepherd_start"):
            kw[key] = _vec2(value, here)
        elif key == "alpha":
            kw[key] = parse_alpha(value, here)
        elif key == "beta":
            kw[key] = _beta(value, here)
        elif key == "policy":
            kw[key] = _enum(Policy, value, here)
        elif key == "reposition_mode":
            kw[key] = _enum(RepositionMode, value, here)
        elif key == "sign_convention":
            kw[key] = _enum(SignConvention, value, here)
        elif key == "record_trajectory":
            if not isinstance(value, bool):
                raise ConfigError(here, "expected true or false")
            kw[key] = value
        elif key == "normal_profile":
            kw[key] = _block(ForceProfile, value, here)
        elif key == "shepherd_gains":
            kw[key] = _block(ShepherdGains, value, here)
        elif key == "discrimination":
            if isinstance(value, Mapping) and "mode" in value:
                raise ConfigError(_join(here, "mode"), "the threshold mode follows from 'policy'")
            kw[key] = _block(
                DiscriminationConfig, value, here, ints=("strike_limit", "reinclusion_delay", "period")
            )
    try:
        cfg = TrialConfig(**kw)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None
    if cfg.beta is None:
        cfg = cfg.replace(beta=BetaEstimate.from_alpha(cfg.alpha))
    return cfg


SWEEP_KEYS = {
    "preset", "alphas", "m_values", "policies", "trials_per_cell", "master_seed",
    "beta_mismatch", "derive_beta", "base",
}


def parse_sweep_spec(doc: Mapping[str, Any] | None = None, where: str = "") -> SweepSpec:
    """Resolve a sweep mapping.  ``preset: desk`` selects 20 trials and M in {1, 4, 7, 10}."""
    doc = {} if doc is None else doc
    _check_keys(doc, SWEEP_KEYS, where)
    kw: dict[str, Any] = {}
    preset = doc.get("preset", "full")
    if preset == "desk":
        kw["trials_per_cell"] = DESK_SCALE_TRIALS
        kw["m_values"] = ACCEPTANCE_M_VALUES
    elif preset != "full":
        raise ConfigError(_join(where, "preset"), f"expected 'full' or 'desk', got {preset!r}")

    if "alphas" in doc:
        here = _join(where, "alphas")
        a = doc["alphas"]
        if a == "all":
            kw["alphas"] = NONTRIVIAL_ALPHAS
        elif isinstance(a, list) and a:
            kw["alphas"] = tuple(parse_alpha(x, f"{here}[{i}]") for i, x in enumerate(a))
        else:
            raise ConfigError(here, "expected 'all' or a non-empty list")
    if "m_values" in doc:
        here = _join(where, "m_values")
        if not isinstance(doc["m_values"], list) or not doc["m_values"]:
            raise ConfigError(here, "expected a non-empty list")
        kw["m_values"] = tuple(_number(m, f"{here}[{i}]", integer=True) for i, m in enumerate(doc["m_values"]))
    if "policies" in doc:
        here = _join(where, "policies")
        if not isinstance(doc["policies"], list) or not doc["policies"]:
            raise ConfigError(here, "expected a non-empty list")
        kw["policies"] = tuple(_enum(Policy, p, f"{here}[{i}]") for i, p in enumerate(doc["policies"]))
    for key in ("trials_per_cell", "master_seed"):
        if key in doc:
            kw[key] = _number(doc[key], _join(where, key), integer=True)
    if "beta_mismatch" in doc:
        kw["beta_mismatch"] = _number(doc["beta_mismatch"], _join(where, "beta_mismatch"))
        if not kw["beta_mismatch"] > 0:
            raise ConfigError(_join(where, "beta_mismatch"), "must be positive")
    if "derive_beta" in doc:
        if not isinstance(doc["derive_beta"], bool):
            raise ConfigError(_join(where, "derive_beta"), "expected true or false")
        kw["derive_beta"] = doc["derive_beta"]
    base_doc = dict(doc.get("base") or {})
    kw["base"] = parse_trial_config(base_doc, _join(where, "base"))
    if "beta" not in base_doc:
        kw["base"] = kw["base"].replace(beta=None)
    try:
        return SweepSpec(**kw)
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def parse_config(source: str | Path | Mapping[str, Any] | None = None, overrides: Mapping[str, Any] | None = None,
                 kind: str = "trial"):
    """Parse a trial config (``kind='trial'``) or sweep spec (``kind='sweep'``).

    ``source`` is a file path, an already-loaded mapping, or ``None`` for
    all defaults; ``overrides`` are merged on top at the top level.
    """
    if source is None:
        doc: dict[str, Any] = {}
    elif isinstance(source, Mapping):
        doc = dict(source)
    else:
        doc = load_document(source)
    if overrides:
        doc.update(overrides)
    if kind == "trial":
        return parse_trial_config(doc)
    if kind == "sweep":
        return parse_sweep_spec(doc)
    raise ValueError(f"unknown config kind {kind!r}")
