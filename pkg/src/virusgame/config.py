"""JSON run configuration: flat keys mirroring the model parameters plus
integrator settings and a threshold distribution block."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .dynamics import (DEFAULT_DT, DEFAULT_EXTINCTION_EPSILON,
                       DEFAULT_HORIZON, SystemParams, ThresholdDistribution)


class ConfigError(ValueError):
    pass


_DIST_PARAMS = {
    "exponential": ("mean",),
    "uniform": ("lo", "hi"),
    "weibull": ("shape", "scale"),
}

_PARAM_KEYS = ("n_nodes", "n_sources", "beta", "gamma", "delta", "delta_s",
               "lambda_influence", "x0", "s0", "infection_cost", "update_cost")

_DEFAULTS = {
    "n_nodes": 500, "n_sources": 50, "beta": 1e-4, "gamma": 1e-3,
    "delta": 0.1, "delta_s": 0.1, "lambda_influence": 1e-4,
    "x0": 0.0, "s0": 10.0, "infection_cost": 1.0, "update_cost": 0.1,
}


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams
    dist: ThresholdDistribution
    dt: float = DEFAULT_DT
    horizon: float = DEFAULT_HORIZON
    extinction_epsilon: float = DEFAULT_EXTINCTION_EPSILON

    def to_dict(self) -> dict:
        doc = {key: getattr(self.params, key) for key in _PARAM_KEYS}
        doc["threshold_dist"] = {
            "kind": self.dist.kind,
            "params": dict(zip(_DIST_PARAMS[self.dist.kind], self.dist.params)),
        }
        doc["dt"] = self.dt
        doc["horizon"] = self.horizon
        doc["extinction_epsilon"] = self.extinction_epsilon
        return doc

    def dump(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _parse_dist(block) -> ThresholdDistribution:
    if not isinstance(block, dict):
        raise ConfigError("threshold_dist must be an object")
    kind = block.get("kind")
    if kind not in _DIST_PARAMS:
        raise ConfigError(f"unknown threshold_dist kind {kind!r}")
    raw = block.get("params", {})
    expected = _DIST_PARAMS[kind]
    unknown = set(raw) - set(expected)
    if unknown:
        raise ConfigError(f"unknown threshold_dist params: {sorted(unknown)}")
    missing = set(expected) - set(raw)
    if missing:
        raise ConfigError(f"missing threshold_dist params: {sorted(missing)}")
    ctor = getattr(ThresholdDistribution, kind)
    try:
        return ctor(*(float(raw[name]) for name in expected))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_config(doc: dict) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    allowed = set(_PARAM_KEYS) | {"threshold_dist", "dt", "horizon",
                                  "extinction_epsilon"}
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    values = dict(_DEFAULTS)
    for key in _PARAM_KEYS:
        if key in doc:
            values[key] = doc[key]
    try:
        params = SystemParams(
            n_nodes=int(values["n_nodes"]), n_sources=int(values["n_sources"]),
            **{k: float(values[k]) for k in _PARAM_KEYS
               if k not in ("n_nodes", "n_sources")})
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    dist = (_parse_dist(doc["threshold_dist"]) if "threshold_dist" in doc
            else ThresholdDistribution.exponential(100.0))
    try:
        dt = float(doc.get("dt", DEFAULT_DT))
        horizon = float(doc.get("horizon", DEFAULT_HORIZON))
        eps = float(doc.get("extinction_epsilon", DEFAULT_EXTINCTION_EPSILON))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    if dt <= 0 or horizon <= 0 or dt > horizon:
        raise ConfigError("require 0 < dt <= horizon")
    return RunConfig(params=params, dist=dist, dt=dt, horizon=horizon,
                     extinction_epsilon=eps)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
    return parse_config(doc)
