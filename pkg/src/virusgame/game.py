"""Strategies and payoffs of the antivirus update game.

An updater pays the update cost; a non-updater risks the infection cost
weighted by the infection probability at the current protection level.
The counting convention: k_updaters includes the focal node when it
updates and excludes it when it does not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .dynamics import SystemParams


class Strategy:
    """Tagged strategy union: Update, NotUpdate, or Mixed(p)."""

    UPDATE = "update"
    NOT_UPDATE = "not_update"


@dataclass(frozen=True)
class Mixed:
    p: float

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("mixing probability must lie in [0, 1]")


@dataclass(frozen=True)
class Fitness:
    value: float


def payoff(strategy: Union[str, Mixed], k_updaters: int, risk: np.ndarray,
           params: SystemParams) -> Fitness:
    """Long-term payoff of a pure strategy against k_updaters updaters.

    Mixed(0) and Mixed(1) are accepted as aliases of the pure strategies;
    interior mixes have no single-profile payoff here and are rejected.
    """
    if isinstance(strategy, Mixed):
        if strategy.p == 1.0:
            strategy = Strategy.UPDATE
        elif strategy.p == 0.0:
            strategy = Strategy.NOT_UPDATE
        else:
            raise ValueError("payoff is defined for pure strategies only")
    if not 0 <= k_updaters <= params.n_nodes:
        raise ValueError("k_updaters out of range")
    if strategy == Strategy.UPDATE:
        return Fitness(-params.update_cost)
    if strategy == Strategy.NOT_UPDATE:
        return Fitness(-float(risk[k_updaters]) * params.infection_cost)
    raise ValueError(f"unknown strategy {strategy!r}")


def indifference_gap(k: int, risk: np.ndarray, params: SystemParams) -> float:
    """I_c * P_i(k) - U_c: positive means a non-updater facing k updaters
    would rather update."""
    if not 0 <= k <= params.n_nodes:
        raise ValueError("k out of range")
    return params.infection_cost * float(risk[k]) - params.update_cost


def gap_table(risk: np.ndarray, params: SystemParams) -> np.ndarray:
    """Vectorised indifference gap over the whole risk table."""
    return params.infection_cost * np.asarray(risk, dtype=float) - params.update_cost
