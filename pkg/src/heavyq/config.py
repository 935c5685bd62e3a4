"""Experiment configuration file handling.

One JSON file fully determines an experiment: primitives, patience mode,
theta, lambda, the n-sequence, horizons and seeds.  Distribution and hazard
specifications are tagged records, e.g. {"kind": "erlang", "shape": 2,
"rate": 2} or {"form": "linear", "slope": 1}.
"""

from __future__ import annotations

import json
from typing import Optional

from .distributions import distribution_from_config, distribution_to_config
from .harness import ExperimentPlan
from .hazards import hazard_from_config, hazard_to_config
from .simulator import HazardScaledPatience, PatienceMode, UnscaledPatience


class ConfigError(ValueError):
    pass


def patience_from_config(cfg: dict) -> PatienceMode:
    mode = cfg.get("mode")
    if mode == "unscaled":
        spec = distribution_from_config(cfg["spec"])
        return UnscaledPatience(spec=spec, f_prime_0=cfg.get("f_prime_0"))
    if mode == "hazard_scaled":
        return HazardScaledPatience(h=hazard_from_config(cfg["hazard"]))
    raise ConfigError(f"patience mode must be 'unscaled' or 'hazard_scaled', got {mode!r}")


def patience_to_config(p: PatienceMode) -> dict:
    if isinstance(p, UnscaledPatience):
        return {
            "mode": "unscaled",
            "spec": distribution_to_config(p.spec),
            "f_prime_0": p.f_prime_0,
        }
    return {"mode": "hazard_scaled", "hazard": hazard_to_config(p.h)}


def plan_from_dict(data: dict, seed_override: Optional[int] = None) -> ExperimentPlan:
    try:
        plan = ExperimentPlan(
            lam=float(data["lambda"]),
            theta=float(data["theta"]),
            arrival_spec=distribution_from_config(data["arrival"]),
            service_spec=distribution_from_config(data["service"]),
            patience=patience_from_config(data["patience"]),
            n_sequence=tuple(data.get("n_sequence", (25, 100, 400))),
            x0=float(data.get("x0", 0.0)),
            horizon_per_n=int(data.get("horizon_per_n", 50_000)),
            burn_in_per_n=int(data.get("burn_in_per_n", 5_000)),
            replications=int(data.get("replications", 8)),
            moment_orders=tuple(data.get("moment_orders", (1.0, 2.0))),
            seed_root=int(seed_override if seed_override is not None else data.get("seed_root", 20240801)),
            q_moment=float(data.get("q_moment", 4.0)),
            max_samples_per_rep=int(data.get("max_samples_per_rep", 250_000)),
            batches=int(data.get("batches", 32)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed experiment config: {exc}") from exc
    return plan


def plan_to_dict(plan: ExperimentPlan) -> dict:
    return {
        "lambda": plan.lam,
        "theta": plan.theta,
        "arrival": distribution_to_config(plan.arrival_spec),
        "service": distribution_to_config(plan.service_spec),
        "patience": patience_to_config(plan.patience),
        "n_sequence": list(plan.n_sequence),
        "x0": plan.x0,
        "horizon_per_n": plan.horizon_per_n,
        "burn_in_per_n": plan.burn_in_per_n,
        "replications": plan.replications,
        "moment_orders": list(plan.moment_orders),
        "seed_root": plan.seed_root,
        "q_moment": plan.q_moment,
        "max_samples_per_rep": plan.max_samples_per_rep,
        "batches": plan.batches,
    }


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc


def load_plan(path, seed_override: Optional[int] = None) -> ExperimentPlan:
    return plan_from_dict(load_config(path), seed_override=seed_override)
