import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import solve_ivp

from muchlab import grid as G
from muchlab import verify as V
from muchlab.characteristics import (exact_ux_mu0zero, exact_uxx_mu0zero, flow_speed,
                                     trace_characteristic, ux_pole_time, uxx_pole_time)
from muchlab.errors import BlowupTimeExceededError
from muchlab.model import ModelParams, momentum

from conftest import smooth_field

MU1 = 1 / math.sqrt(2)


class TestFlowSpeed:
    def test_constant(self):
        c0, params = 0.7, ModelParams(1.5, 0.5)
        v = flow_speed(np.full(32, c0), params, np.array([0.0, 0.123, 0.9]))
        np.testing.assert_allclose(v, 2 * 1.5 * c0 ** 2 + 0.5 * c0, rtol=1e-14)

    def test_mean_zero_drops_mean_term(self):
        n = 64
        u = smooth_field(n, seed=4)
        u -= u.mean()
        params = ModelParams(2.0, 3.0)
        x = 0.3141
        ux = G.interpolate(G.deriv(u, 1), x)
        assert flow_speed(u, params, x) == pytest.approx(-2.0 * ux ** 2 + 3.0 * G.interpolate(u, x), rel=1e-12)

    def test_nodes_match_gridpoint_formula(self):
        n = 64
        u = smooth_field(n, seed=6, mean=0.3)
        x = np.arange(n) / n
        ux = G.deriv(u, 1)
        ref = 2 * np.mean(u) * u - ux ** 2 + u
        np.testing.assert_allclose(flow_speed(u, ModelParams(), x), ref, rtol=0, atol=1e-12)


class TestSlopeLaw:
    def test_initial_value(self):
        assert exact_ux_mu0zero(0.0, -0.4, MU1, 1.0) == -0.4

    def test_flat_start(self):
        expected = -(1 / math.sqrt(2)) * math.tan(1 / (2 * math.sqrt(2)))
        assert exact_ux_mu0zero(1.0, 0.0, MU1, 1.0) == pytest.approx(expected, rel=1e-14)
        # the quoted value -0.26094 is a rounded approximation
        assert expected == pytest.approx(-0.26094, abs=5e-5)

    def test_pole_time(self):
        t_star = ux_pole_time(-1.0, MU1, 1.0)
        assert t_star == pytest.approx(-2 * math.atan(MU1 / -1.0) / MU1, rel=1e-15)
        # 1.74085 is quoted to five decimals
        assert t_star == pytest.approx(1.74085, abs=2e-5)

    def test_beyond_pole(self):
        with pytest.raises(BlowupTimeExceededError):
            exact_ux_mu0zero(1.8, -1.0, MU1, 1.0)

    @given(st.floats(-3, 3), st.floats(0.1, 2.0), st.floats(0.2, 3.0))
    def test_matches_riccati(self, u0x, mu1, k2):
        # w = k2 u_x obeys w' = -(w^2 + k2^2 mu1^2) / 2
        t_end = 0.5 * ux_pole_time(u0x, mu1, k2)
        sol = solve_ivp(lambda t, w: -0.5 * (w * w + k2 * k2 * mu1 * mu1), (0, t_end), [k2 * u0x],
                        rtol=1e-12, atol=1e-12)
        got = exact_ux_mu0zero(t_end, u0x, mu1, k2)
        assert got == pytest.approx(sol.y[0, -1] / k2, rel=1e-8, abs=1e-9)

    def test_riccati_blows_up_at_pole(self):
        t_star = ux_pole_time(-1.0, MU1, 1.0)
        blew = lambda t, w: w[0] + 1e8
        blew.terminal = True
        sol = solve_ivp(lambda t, w: -0.5 * (w * w + MU1 * MU1), (0, 3.0), [-1.0], events=blew,
                        rtol=1e-12, atol=1e-12)
        assert sol.t_events[0][0] == pytest.approx(t_star, abs=1e-6)


class TestCurvatureLaw:
    def test_initial_value(self):
        assert exact_uxx_mu0zero(0.0, -0.5, 2.0, MU1, 1.0, 1.0) == pytest.approx(2.0, rel=1e-15)

    def test_zero_is_fixed(self):
        assert exact_uxx_mu0zero(0.7, -0.5, 0.0, MU1, 1.0, 1.0) == 0.0

    @pytest.mark.parametrize("u0x,u0xx,k1,k2", [(-1.0, 1.0, 1.0, 1.0), (-0.5, 2.0, 1.0, 1.0),
                                                (0.3, -1.5, 2.0, 0.5)])
    def test_matches_ode(self, u0x, u0xx, k1, k2):
        t = min(0.5, 0.5 * uxx_pole_time(u0x, u0xx, MU1, k1, k2))

        def f(s, y):
            ux = exact_ux_mu0zero(s, u0x, MU1, k2)
            return [2 * ux * (y[0] ** 2 - k2 * y[0])]

        sol = solve_ivp(f, (0, t), [k1 * u0xx], rtol=1e-12, atol=1e-12)
        assert exact_uxx_mu0zero(t, u0x, u0xx, MU1, k1, k2) == pytest.approx(sol.y[0, -1] / k1, abs=1e-6)

    def test_sine_data_curvature_pole(self):
        # for u0 = sin(2 pi x) / (2 pi) the curvature law diverges long before any slope pole
        x = np.arange(4096) / 4096
        u0x, u0xx = np.cos(2 * math.pi * x), -2 * math.pi * np.sin(2 * math.pi * x)
        poles = [uxx_pole_time(a, b, MU1, 1.0, 1.0) for a, b in zip(u0x, u0xx)]
        j = int(np.argmin(poles))
        assert 0.136 < poles[j] < 0.137
        assert poles[j] < ux_pole_time(u0x[j], MU1, 1.0)
        with pytest.raises(BlowupTimeExceededError):
            exact_uxx_mu0zero(poles[j], u0x[j], u0xx[j], MU1, 1.0, 1.0)


class TestTrace:
    def test_constant_state(self):
        run = V.constant_run()
        c0 = 0.7
        for x0 in (0.0, 0.3, 0.77):
            tr = trace_characteristic(run, x0)
            np.testing.assert_allclose(tr.q, x0 + (2 * c0 ** 2 + c0) * tr.t, rtol=0, atol=1e-12)
            assert np.max(np.abs(tr.residual)) < 1e-13
            np.testing.assert_allclose(tr.qx, 1.0, rtol=0, atol=1e-13)

    def test_initial_sample(self):
        tr = trace_characteristic(V.positive_momentum_run(), 0.4)
        assert tr.residual[0] == 0.0
        assert tr.qx[0] == 1.0
        assert tr.t[0] == 0.0

    def test_jacobian_positive_without_blowup(self):
        run = V.positive_momentum_run()
        for x0 in np.arange(8) / 8:
            assert trace_characteristic(run, x0).qx.min() > 0

    def test_smooth_run_residual(self):
        run = V.smooth_run()
        m0 = float(np.max(np.abs(momentum(run.snapshots[0].u))))
        worst = max(np.max(np.abs(trace_characteristic(run, x0).residual)) for x0 in np.arange(8) / 8)
        assert worst / m0 < 1e-4

    def test_positive_momentum_residual(self):
        run = V.positive_momentum_run()
        m0 = float(np.max(np.abs(momentum(run.snapshots[0].u))))
        worst = max(np.max(np.abs(trace_characteristic(run, x0).residual)) for x0 in np.arange(8) / 8)
        assert worst / m0 < 1e-4

    def test_blowup_run_is_truncated(self):
        tr = trace_characteristic(V.mean_zero_run(), 0.25)
        assert tr.truncated

    def test_mean_zero_early_agreement(self):
        run = V.mean_zero_run()
        mu1 = math.sqrt(run.diagnostics[0].mu1sq)
        tr = trace_characteristic(run, 0.25)
        early = tr.t <= 0.1
        exact = np.array([exact_ux_mu0zero(t, 0.0, mu1, 1.0) for t in tr.t[early]])
        assert np.max(np.abs(tr.ux[early] - exact)) < 1e-3

    def test_mean_zero_agreement_up_to_most_of_slope_pole(self):
        # the slope law should be tracked while t <= 0.8 t*, t* the slope pole from x0
        run = V.mean_zero_run()
        mu1 = math.sqrt(run.diagnostics[0].mu1sq)
        tr = trace_characteristic(run, 0.25)
        horizon = 0.8 * ux_pole_time(0.0, mu1, 1.0)
        assert tr.t[-1] >= min(horizon, 1.2)
        window = tr.t <= horizon
        exact = np.array([exact_ux_mu0zero(t, 0.0, mu1, 1.0) for t in tr.t[window]])
        assert np.max(np.abs(tr.ux[window] - exact)) < 1e-3


class TestPositiveMomentumBounds:
    def test_sign_preserved(self):
        run = V.positive_momentum_run()
        m0 = float(np.max(np.abs(momentum(run.snapshots[0].u))))
        assert min(d.min_m for d in run.diagnostics) >= -1e-6 * m0

    def test_slope_and_oscillation_bounds(self):
        run = V.positive_momentum_run()
        mu1 = math.sqrt(run.diagnostics[0].mu1sq)
        for s in run.snapshots:
            ux = G.deriv(s.u, 1)
            assert np.all(np.abs(ux) <= s.u + 1e-8)
            assert np.max(np.abs(s.u - s.u.mean())) <= math.sqrt(3) / 6 * mu1 + 1e-8
