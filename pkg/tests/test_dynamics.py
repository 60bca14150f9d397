import dataclasses

import numpy as np
import pytest

from virusgame.dynamics import (DEFAULT_EXTINCTION_EPSILON, SystemParams,
                                SystemState, ThresholdDistribution,
                                derivatives, integrate)

FIG3 = SystemParams(n_nodes=100, n_sources=50, beta=1e-3, gamma=1e-3,
                    delta=1e-1, delta_s=1e-1, lambda_influence=5e-6,
                    x0=0.0, s0=5.0, infection_cost=1.0, update_cost=0.1)

EXP100 = ThresholdDistribution.exponential(100.0)


class TestThresholdDistribution:
    @pytest.mark.parametrize("dist", [
        ThresholdDistribution.exponential(10.0),
        ThresholdDistribution.uniform(2.0, 7.0),
        ThresholdDistribution.weibull(2.0, 5.0),
        ThresholdDistribution.weibull(0.8, 5.0),
    ])
    def test_cdf_shape(self, dist):
        x = np.linspace(-1.0, 50.0, 400)
        F = dist.cdf(x)
        assert (np.diff(F) >= -1e-15).all()
        assert F[0] >= 0.0
        assert dist.cdf(1e9) == pytest.approx(1.0)

    @pytest.mark.parametrize("dist", [
        ThresholdDistribution.exponential(10.0),
        ThresholdDistribution.uniform(2.0, 7.0),
        ThresholdDistribution.weibull(2.0, 5.0),
    ])
    def test_hazard_nonnegative_below_saturation(self, dist):
        x = np.linspace(0.0, 20.0, 200)
        h = np.asarray(dist.hazard(x))
        ok = dist.cdf(x) < 1.0
        assert (h[ok] >= 0.0).all()

    def test_exponential_constant_hazard(self):
        dist = ThresholdDistribution.exponential(4.0)
        for x in [0.0, 1.0, 17.3, 1e4]:
            assert dist.hazard(x) == pytest.approx(0.25)

    def test_uniform_saturates(self):
        dist = ThresholdDistribution.uniform(0.0, 5.0)
        assert np.isinf(dist.hazard(5.0))
        assert np.isinf(dist.hazard(9.0))
        assert dist.hazard(4.0) == pytest.approx(1.0)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            ThresholdDistribution.exponential(0.0)
        with pytest.raises(ValueError):
            ThresholdDistribution.uniform(3.0, 3.0)
        with pytest.raises(ValueError):
            ThresholdDistribution.weibull(-1.0, 2.0)


class TestSystemParams:
    def test_rejects_negative_rate(self):
        with pytest.raises(ValueError):
            dataclasses.replace(FIG3, beta=-1e-3)

    def test_rejects_excess_initials(self):
        with pytest.raises(ValueError):
            dataclasses.replace(FIG3, x0=101.0)
        with pytest.raises(ValueError):
            dataclasses.replace(FIG3, s0=51.0)

    def test_rejects_tiny_population(self):
        with pytest.raises(ValueError):
            dataclasses.replace(FIG3, n_nodes=1)


class TestDerivatives:
    def test_all_quiet_no_motion(self):
        params = dataclasses.replace(FIG3, lambda_influence=0.0)
        state = SystemState(x=0.0, s=0.0, x_bar=0.0, t=0.0)
        assert derivatives(state, params, 0.0, EXP100) == (0.0, 0.0, 0.0)

    def test_direct_substitution(self):
        state = SystemState(x=0.0, s=5.0, x_bar=0.0, t=0.0)
        dx, _, dxb = derivatives(state, FIG3, 0.0, EXP100)
        assert dx == pytest.approx(0.5)
        assert dxb == pytest.approx(0.5)

    def test_initial_slope_matches_source_forcing(self):
        # at t=0 with X(0)=0 the only inflow is source contacts
        state = SystemState(x=0.0, s=FIG3.s0, x_bar=0.0, t=0.0)
        for k in [0.0, 10.0, 50.0]:
            dx, _, _ = derivatives(state, FIG3, k, EXP100)
            assert dx == pytest.approx(FIG3.gamma * FIG3.s0 * (FIG3.n_nodes - k))

    def test_k_out_of_range(self):
        state = SystemState(x=0.0, s=0.0, x_bar=0.0, t=0.0)
        with pytest.raises(ValueError):
            derivatives(state, FIG3, -1.0, EXP100)

    def test_saturated_hazard_uses_fallback(self):
        dist = ThresholdDistribution.uniform(0.0, 5.0)
        state = SystemState(x=1.0, s=1.0, x_bar=10.0, t=0.0)
        _, ds, _ = derivatives(state, FIG3, 0.0, dist, fallback_hazard=2.0)
        expected = -FIG3.delta_s + FIG3.lambda_influence * 2.0 * (FIG3.n_sources - 1.0)
        assert ds == pytest.approx(expected)


class TestIntegrate:
    def test_zero_initials_zero_influence(self):
        params = dataclasses.replace(FIG3, lambda_influence=0.0, s0=0.0, x0=0.0)
        traj = integrate(params, 0.0, EXP100, horizon=50.0, dt=0.1)
        assert np.all(traj.x == 0.0)
        assert np.all(traj.s == 0.0)
        assert traj.extinction_time == 0.0

    def test_full_protection_pure_decay(self):
        params = dataclasses.replace(FIG3, x0=10.0, s0=0.0)
        traj = integrate(params, 100.0, EXP100, horizon=150.0, dt=0.1)
        np.testing.assert_allclose(traj.x, 10.0 * np.exp(-0.1 * traj.t),
                                   atol=1e-8)
        assert np.allclose(traj.x_bar, 10.0)
        assert traj.extinction_time is not None

    def test_protection_lowers_peak_and_speeds_decay(self):
        trajs = {p: integrate(FIG3, p * FIG3.n_nodes, EXP100) for p in (0.01, 0.1, 0.5)}
        assert trajs[0.01].x.max() > trajs[0.1].x.max() > trajs[0.5].x.max()
        # extinction, when reached, comes sooner with more protection
        assert trajs[0.5].extinction_time < trajs[0.1].extinction_time

    def test_boundedness_and_cumulative_monotone(self):
        for k in [0.0, 20.0, 60.0]:
            traj = integrate(FIG3, k, EXP100, horizon=300.0, dt=0.1)
            assert (traj.x >= 0.0).all()
            assert (traj.x <= FIG3.n_nodes - k + 1e-12).all()
            assert (traj.s >= 0.0).all()
            assert (traj.s <= FIG3.n_sources + 1e-12).all()
            assert (np.diff(traj.x_bar) >= -1e-12).all()

    def test_step_halving_peak_stable(self):
        coarse = integrate(FIG3, 10.0, EXP100, horizon=300.0, dt=0.1)
        fine = integrate(FIG3, 10.0, EXP100, horizon=300.0, dt=0.05)
        rel = abs(coarse.x.max() - fine.x.max()) / fine.x.max()
        assert rel < 0.005

    def test_exponential_hazard_closed_form_sources(self):
        # beta = gamma = 0 decouples S; constant hazard gives a linear ODE
        mean, lam = 50.0, 1e-2
        params = dataclasses.replace(FIG3, beta=0.0, gamma=0.0,
                                     lambda_influence=lam)
        dist = ThresholdDistribution.exponential(mean)
        traj = integrate(params, 0.0, dist, horizon=100.0, dt=0.1)
        rate = params.delta_s + lam / mean
        s_inf = lam / mean * params.n_sources / rate
        exact = s_inf + (params.s0 - s_inf) * np.exp(-rate * traj.t)
        np.testing.assert_allclose(traj.s, exact, atol=1e-8)

    @pytest.mark.parametrize("dist", [
        EXP100, ThresholdDistribution.weibull(2.0, 500.0)])
    @pytest.mark.parametrize("params", [
        FIG3,
        dataclasses.replace(FIG3, n_nodes=60, s0=3.0),
        dataclasses.replace(FIG3, beta=5e-4, gamma=2e-3),
        dataclasses.replace(FIG3, delta=0.05, delta_s=0.2),
    ])
    def test_protection_monotonicity_pointwise(self, params, dist):
        ks = [0.0, 5.0, 15.0, 40.0]
        trajs = [integrate(params, k, dist, horizon=200.0, dt=0.1) for k in ks]
        for lo, hi in zip(trajs, trajs[1:]):
            assert (hi.x <= lo.x + 1e-9).all()

    def test_hazard_saturation_flagged(self):
        dist = ThresholdDistribution.uniform(0.0, 5.0)
        params = dataclasses.replace(FIG3, lambda_influence=1e-2)
        traj = integrate(params, 0.0, dist, horizon=200.0, dt=0.1)
        assert traj.hazard_saturated
        assert traj.x_bar[-1] > 5.0

    def test_bad_grid_rejected(self):
        with pytest.raises(ValueError):
            integrate(FIG3, 0.0, EXP100, horizon=0.0, dt=0.1)
        with pytest.raises(ValueError):
            integrate(FIG3, 0.0, EXP100, horizon=1.0, dt=2.0)
