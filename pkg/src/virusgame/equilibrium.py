"""Nash equilibrium solvers and derived economic quantities.

All solvers work off the indifference gap D(k) = I_c * P_i(k) - U_c over a
complete risk table.  Mixed equilibria are roots of a Bernstein-form
polynomial in the activation probability; since the gap is nonincreasing
the polynomial is monotone and plain bisection is unconditionally safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.stats import binom

from .dynamics import (DEFAULT_DIST, DEFAULT_DT, DEFAULT_HORIZON,
                       SystemParams, ThresholdDistribution)
from .game import gap_table
from .risk import risk_profile

RESIDUAL_TOL = 1e-9
INTERVAL_TOL = 1e-12
_SCAN_POINTS = 1000


@dataclass(frozen=True)
class Pure:
    psi: int


@dataclass(frozen=True)
class FullyMixed:
    p_star: float
    residual: float


@dataclass(frozen=True)
class MixerProfile:
    n_u: int
    n_nu: int
    p_star: float
    residual: float
    stability_violation: bool = False


@dataclass(frozen=True)
class NoInteriorEquilibrium:
    boundary: int  # 0: nobody updates, 1: everybody updates
    reason: str = ""


EquilibriumResult = Union[Pure, FullyMixed, MixerProfile, NoInteriorEquilibrium]


def pure_ne(risk: np.ndarray, params: SystemParams) -> Pure:
    """Unique pure equilibrium count of updaters, by exhaustive scan.

    k is an equilibrium iff a non-updater facing k-1 updaters prefers to
    update (gap(k-1) >= 0) and one facing k prefers not to (gap(k) <= 0);
    boundaries use only the applicable condition.
    """
    n = params.n_nodes
    if len(risk) < n + 1:
        raise ValueError("risk table must cover k = 0..N")
    gap = gap_table(risk, params)
    hits = [k for k in range(n + 1)
            if (k == 0 or gap[k - 1] >= 0) and (k == n or gap[k] <= 0)]
    if len(hits) > 1:
        raise RuntimeError(
            f"pure NE uniqueness violated (candidates {hits}); "
            "risk table is not monotone")
    if not hits:
        # impossible for a nonincreasing gap; defensive
        raise RuntimeError("no pure NE found; risk table is not monotone")
    return Pure(hits[0])


def _bernstein_gap(gap: np.ndarray, p: float) -> float:
    """Expected gap of a focal node against len(gap)-1... opponents mixing
    at p: sum_k C(m, k) p^k (1-p)^(m-k) gap[k] with m = len(gap) - 1."""
    m = len(gap) - 1
    if m == 0:
        return float(gap[0])
    weights = binom.pmf(np.arange(m + 1), m, p)
    return float(weights @ gap)


def _solve_bernstein(gap: np.ndarray, residual_tol: float = RESIDUAL_TOL,
                     interval_tol: float = INTERVAL_TOL):
    """Root of the monotone Bernstein polynomial; returns (p, residual) or a
    NoInteriorEquilibrium when the gap has one sign at both ends."""
    f0 = _bernstein_gap(gap, 0.0)
    f1 = _bernstein_gap(gap, 1.0)
    if f0 <= 0:
        return NoInteriorEquilibrium(0)
    if f1 >= 0:
        return NoInteriorEquilibrium(1)

    grid = np.linspace(0.0, 1.0, _SCAN_POINTS)
    vals = np.array([_bernstein_gap(gap, p) for p in grid])
    neg_seen = False
    for v in vals:
        if v < 0:
            neg_seen = True
        elif v > 0 and neg_seen:
            raise RuntimeError(
                "expected-gap polynomial is not monotone (sign pattern -,+)")

    idx = int(np.nonzero(vals <= 0)[0][0])
    lo, hi = grid[idx - 1], grid[idx]
    flo = vals[idx - 1]
    while hi - lo > interval_tol:
        mid = 0.5 * (lo + hi)
        fm = _bernstein_gap(gap, mid)
        if abs(fm) <= residual_tol:
            return float(mid), fm
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    return float(mid), _bernstein_gap(gap, mid)


def mixed_ne(risk: np.ndarray, params: SystemParams,
             residual_tol: float = RESIDUAL_TOL,
             interval_tol: float = INTERVAL_TOL) -> EquilibriumResult:
    """Symmetric fully mixed equilibrium activation probability."""
    n = params.n_nodes
    if len(risk) < n + 1:
        raise ValueError("risk table must cover k = 0..N")
    gap = gap_table(risk, params)[:n]  # k = 0..N-1 opponents updating
    sol = _solve_bernstein(gap, residual_tol, interval_tol)
    if isinstance(sol, NoInteriorEquilibrium):
        return sol
    p, res = sol
    return FullyMixed(p_star=p, residual=res)


def mixer_nonmixer_ne(n_u: int, n_nu: int, risk: np.ndarray,
                      params: SystemParams,
                      residual_tol: float = RESIDUAL_TOL,
                      interval_tol: float = INTERVAL_TOL) -> EquilibriumResult:
    """Equilibrium when n_u players always update, n_nu never do, and the
    rest mix.  Feasible only for n_u < psi and n_u + n_nu <= N - 2."""
    n = params.n_nodes
    if n_u < 0 or n_nu < 0 or n_u + n_nu > n:
        raise ValueError("require n_u, n_nu >= 0 and n_u + n_nu <= N")
    if len(risk) < n + 1:
        raise ValueError("risk table must cover k = 0..N")

    psi = pure_ne(risk, params).psi
    if n_u >= psi:
        return NoInteriorEquilibrium(
            0, reason=f"n_u={n_u} >= psi={psi}: committed updaters already "
            "cover the pure equilibrium")
    if n_u + n_nu > n - 2:
        return NoInteriorEquilibrium(
            0, reason=f"n_u + n_nu = {n_u + n_nu} > N - 2 = {n - 2}: "
            "fewer than two mixers")

    m = n - n_u - n_nu  # mixers
    gap = gap_table(risk, params)[n_u:n_u + m]  # focal mixer vs m-1 opponents
    sol = _solve_bernstein(gap, residual_tol, interval_tol)
    if isinstance(sol, NoInteriorEquilibrium):
        return sol
    p, res = sol

    # stability of the committed updaters: switching to mix must not pay,
    # i.e. the expected gap seen by a deviating pure-U player stays >= 0
    violation = False
    if n_u > 0:
        full_gap = gap_table(risk, params)
        weights = binom.pmf(np.arange(m + 1), m, p)
        dev = float(weights @ full_gap[n_u - 1:n_u + m])
        violation = dev < -residual_tol
    return MixerProfile(n_u=n_u, n_nu=n_nu, p_star=p, residual=res,
                        stability_violation=violation)


def epidemic_threshold(params: SystemParams):
    """Complete-graph epidemic threshold 1/(N-1) and the die-out verdict."""
    tau_c = 1.0 / (params.n_nodes - 1)
    if params.delta > 0:
        dies_out = params.beta / params.delta < tau_c
    else:
        # infinite transmission/curing ratio unless there is no transmission
        dies_out = params.beta == 0
    return tau_c, dies_out


def cost_gain(p_star: float) -> float:
    """Fractional saving in total update spend at equilibrium; the
    (U_c N - p U_c N) / (U_c N) expression simplifies to 1 - p exactly."""
    if not 0.0 <= p_star <= 1.0:
        raise ValueError("p_star must lie in [0, 1]")
    return 1.0 - p_star


def critical_update_cost(params: SystemParams,
                         dist: ThresholdDistribution = DEFAULT_DIST,
                         horizon: float = DEFAULT_HORIZON,
                         dt: float = DEFAULT_DT) -> float:
    """Smallest update cost at which nobody is willing to update.

    The mixed solver hits the nobody-updates boundary exactly when the gap
    at zero updaters is nonpositive, so the critical cost is I_c * P_i(0).
    """
    risk = risk_profile(params, dist, horizon=horizon, dt=dt)
    return params.infection_cost * float(risk[0])
