"""JSON config schema shared by the CLI and the HTTP service.

A config document holds a study design, optional simulation fields, and
optional effect/output settings. Unknown keys are rejected everywhere so a
typo never silently falls back to a default, and all distribution specs are
validated at parse time.
"""

from __future__ import annotations

import json
import math
from typing import Optional

from .design import StudyDesign
from .distributions import ConfigurationError, DistributionSpec
from .inference import EffectSpec
from .simulate import PowerEffect, SimulationPlan

_DESIGN_KEYS = {"theta", "tau", "n", "pi_incident", "survival", "arrival",
                "incident_entry", "weight", "dropout"}
_PLAN_KEYS = {"replications", "seed", "experiment", "grid", "pi_values",
              "comparison_pis", "power_effect", "threads"}
_EFFECT_KEYS = {"log_hr", "predictor_variance", "r_squared_adjustment",
                "group_fraction"}
_POWER_KEYS = {"beta", "group_sizes", "alpha", "censor_shapes"}
_TOP_KEYS = {"design", "plan", "effect", "alpha", "fixed_time"}


def _require_number(obj, key, where):
    v = obj[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
        raise ConfigurationError(f"{where}.{key} must be a finite number, got {v!r}")
    return float(v)


def parse_design(obj: dict) -> StudyDesign:
    if not isinstance(obj, dict):
        raise ConfigurationError("design must be an object")
    extra = set(obj) - _DESIGN_KEYS
    if extra:
        raise ConfigurationError(f"unknown design keys: {sorted(extra)}")
    missing = [k for k in ("theta", "tau", "n", "pi_incident", "survival",
                           "arrival", "incident_entry", "weight") if k not in obj]
    if missing:
        raise ConfigurationError(f"design missing keys: {missing}")
    n = obj["n"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ConfigurationError(f"design.n must be a positive integer, got {n!r}")
    return StudyDesign(
        theta=_require_number(obj, "theta", "design"),
        tau=_require_number(obj, "tau", "design"),
        n=n,
        pi_incident=_require_number(obj, "pi_incident", "design"),
        survival=DistributionSpec.from_config(obj["survival"]),
        arrival=DistributionSpec.from_config(obj["arrival"]),
        incident_entry=DistributionSpec.from_config(obj["incident_entry"]),
        weight=DistributionSpec.from_config(obj["weight"]),
        dropout=(DistributionSpec.from_config(obj["dropout"])
                 if obj.get("dropout") is not None else None),
    )


def emit_design(design: StudyDesign) -> dict:
    out = {
        "theta": design.theta,
        "tau": design.tau,
        "n": design.n,
        "pi_incident": design.pi_incident,
        "survival": design.survival.to_config(),
        "arrival": design.arrival.to_config(),
        "incident_entry": design.incident_entry.to_config(),
        "weight": design.weight.to_config(),
    }
    if design.dropout is not None:
        out["dropout"] = design.dropout.to_config()
    return out


def parse_effect(obj: dict) -> EffectSpec:
    if not isinstance(obj, dict):
        raise ConfigurationError("effect must be an object")
    extra = set(obj) - _EFFECT_KEYS
    if extra:
        raise ConfigurationError(f"unknown effect keys: {sorted(extra)}")
    if "log_hr" not in obj:
        raise ConfigurationError("effect missing log_hr")
    kwargs = {"log_hr": _require_number(obj, "log_hr", "effect")}
    if "predictor_variance" in obj:
        kwargs["predictor_variance"] = _require_number(obj, "predictor_variance", "effect")
    if "r_squared_adjustment" in obj:
        kwargs["r_squared_adjustment"] = _require_number(obj, "r_squared_adjustment", "effect")
    if "group_fraction" in obj:
        gf = obj["group_fraction"]
        kwargs["group_fraction"] = None if gf is None else _require_number(obj, "group_fraction", "effect")
    try:
        return EffectSpec(**kwargs)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def parse_plan(obj: dict, design: StudyDesign, *, default_seed: int = 42,
               default_reps: int = 1000) -> SimulationPlan:
    if not isinstance(obj, dict):
        raise ConfigurationError("plan must be an object")
    extra = set(obj) - _PLAN_KEYS
    if extra:
        raise ConfigurationError(f"unknown plan keys: {sorted(extra)}")
    power = None
    if obj.get("power_effect") is not None:
        pe = obj["power_effect"]
        pextra = set(pe) - _POWER_KEYS
        if pextra:
            raise ConfigurationError(f"unknown power_effect keys: {sorted(pextra)}")
        if "beta" not in pe:
            raise ConfigurationError("power_effect missing beta")
        power = PowerEffect(
            beta=_require_number(pe, "beta", "power_effect"),
            group_sizes=tuple(pe.get("group_sizes", (500, 500))),
            alpha=float(pe.get("alpha", 0.05)),
            censor_shapes=tuple(pe.get("censor_shapes", (1.0,))),
        )
    try:
        return SimulationPlan(
            design=design,
            replications=int(obj.get("replications", default_reps)),
            seed=int(obj.get("seed", default_seed)),
            experiment=obj.get("experiment", "risk_and_variance"),
            grid=tuple(obj["grid"]) if obj.get("grid") is not None else None,
            pi_values=tuple(obj.get("pi_values", (0.25, 0.5, 0.75))),
            comparison_pis=tuple(obj.get("comparison_pis", (0.5, 0.0, 1.0))),
            power_effect=power,
            threads=int(obj.get("threads", 1)),
        )
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc


def parse_document(obj: dict):
    """Full config document: returns (design, plan or None, effect or None, extras)."""
    if not isinstance(obj, dict):
        raise ConfigurationError("config root must be an object")
    extra = set(obj) - _TOP_KEYS
    if extra:
        raise ConfigurationError(f"unknown top-level keys: {sorted(extra)}")
    if "design" not in obj:
        raise ConfigurationError("config missing 'design'")
    design = parse_design(obj["design"])
    plan = parse_plan(obj["plan"], design) if "plan" in obj else None
    effect = parse_effect(obj["effect"]) if "effect" in obj else None
    extras = {}
    if "alpha" in obj:
        extras["alpha"] = _require_number(obj, "alpha", "config")
    if "fixed_time" in obj:
        extras["fixed_time"] = _require_number(obj, "fixed_time", "config")
    return design, plan, effect, extras


def load_config(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from exc


def dump_config(obj: dict, path: Optional[str] = None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text
