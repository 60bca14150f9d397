"""Infection probability over the epidemic lifetime.

A susceptible node accrues infection hazard beta*X(t) + gamma*S(t); the
probability of being infected at least once before virus extinction is
1 - exp(-integral of that hazard over [0, t_f]).
"""

from __future__ import annotations

import dataclasses
import functools
from dataclasses import dataclass

import numpy as np

from .dynamics import (DEFAULT_DIST, DEFAULT_DT, DEFAULT_EXTINCTION_EPSILON,
                       DEFAULT_HORIZON, SystemParams, ThresholdDistribution,
                       Trajectory, batch_extinction_stats)

_RISK_CHUNK = 256


@dataclass(frozen=True)
class InfectionRisk:
    p_infect: float
    hazard_integral: float
    t_f: float
    truncated: bool = False


def infection_probability(traj: Trajectory, params: SystemParams) -> InfectionRisk:
    """P(infected before extinction) by trapezoidal quadrature of the hazard.

    If the trajectory never went extinct, the horizon end is used as t_f and
    the result is flagged truncated.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    if (traj.x < 0).any() or (traj.s < 0).any():
        raise ValueError("trajectory contains negative samples")
    truncated = traj.extinction_time is None
    t_f = float(traj.t[-1]) if truncated else traj.extinction_time
    mask = traj.t <= t_f + 1e-12
    hazard = params.beta * traj.x[mask] + params.gamma * traj.s[mask]
    integral = float(np.trapezoid(hazard, traj.t[mask]))
    return InfectionRisk(p_infect=float(-np.expm1(-integral)),
                         hazard_integral=integral, t_f=t_f, truncated=truncated)


def remaining_risk(traj: Trajectory, params: SystemParams) -> np.ndarray:
    """Per-sample probability of being infected between t and t_f.

    Starts at the full infection probability and decays to zero as the
    remaining hazard mass vanishes; samples past t_f are exactly zero.
    """
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    truncated = traj.extinction_time is None
    t_f = float(traj.t[-1]) if truncated else traj.extinction_time
    hazard = params.beta * traj.x + params.gamma * traj.s
    seg = 0.5 * np.diff(traj.t) * (hazard[:-1] + hazard[1:])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = np.interp(t_f, traj.t, cum)
    tail = np.maximum(total - cum, 0.0)
    tail[traj.t > t_f + 1e-12] = 0.0
    return -np.expm1(-tail)


def risk_profile(params: SystemParams,
                 dist: ThresholdDistribution = DEFAULT_DIST,
                 horizon: float = DEFAULT_HORIZON, dt: float = DEFAULT_DT,
                 extinction_epsilon: float = DEFAULT_EXTINCTION_EPSILON) -> np.ndarray:
    """Table P_i(k) for k = 0..N updaters, memoized per parameter set.

    Equilibrium solvers and cost sweeps all read from this table; the
    update/infection costs do not enter the dynamics, so the cache also
    serves every cost variation of the same rate parameters.
    """
    base = dataclasses.replace(params, infection_cost=0.0, update_cost=0.0)
    return _risk_profile_cached(base, dist, horizon, dt, extinction_epsilon)


@functools.lru_cache(maxsize=64)
def _risk_profile_cached(params: SystemParams, dist: ThresholdDistribution,
                         horizon: float, dt: float,
                         extinction_epsilon: float) -> np.ndarray:
    ks = np.arange(params.n_nodes + 1)
    out = np.empty(params.n_nodes + 1)
    for lo in range(0, len(ks), _RISK_CHUNK):
        chunk = ks[lo:lo + _RISK_CHUNK]
        _, integral, _, _ = batch_extinction_stats(
            params, chunk, dist, horizon=horizon, dt=dt,
            extinction_epsilon=extinction_epsilon)
        out[lo:lo + _RISK_CHUNK] = -np.expm1(-integral)
    out.flags.writeable = False
    return out
