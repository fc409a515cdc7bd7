import math

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from muchlab import grid as G
from muchlab import verify as V
from muchlab.errors import CollisionError, NoRealPeakonError
from muchlab.model import ModelParams
from muchlab.peakons import (PeakonSystem, amplitude_for_speed, integrate_peakons, min_gap,
                             multipeakon_rhs, sample_field, speed_for_amplitude,
                             two_peakon_closed_form)
from muchlab.timestepper import StepControl, rk4

TIGHT = StepControl(abs_tol=1e-13, rel_tol=1e-13)


class TestAmplitude:
    def test_k1_zero_branch(self):
        sol = amplitude_for_speed(1.0, ModelParams(0, 1))
        assert sol.roots == pytest.approx((12 / 13,), rel=1e-15)

    def test_k2_zero_positive_root(self):
        sol = amplitude_for_speed(1.0, ModelParams(1, 0))
        assert max(sol.roots) == pytest.approx(2 * math.sqrt(3) / 5, rel=1e-15)

    def test_unit_coefficients(self):
        sol = amplitude_for_speed(1.0, ModelParams(1, 1))
        assert sol.roots[0] == pytest.approx(0.48, rel=1e-14)
        assert sol.roots[1] == pytest.approx(-1.0, rel=1e-14)
        assert not sol.degenerate

    def test_double_root(self):
        sol = amplitude_for_speed(-169 / 1200, ModelParams(1, 1))
        assert sol.degenerate
        assert sol.roots == pytest.approx((-0.26,), rel=1e-14)

    def test_no_real_root(self):
        with pytest.raises(NoRealPeakonError):
            amplitude_for_speed(-1.0, ModelParams(1, 1))

    def test_both_zero(self):
        with pytest.raises(ValueError):
            amplitude_for_speed(1.0, ModelParams(0, 0))

    @pytest.mark.parametrize("a,params,c", [(0.48, ModelParams(1, 1), 1.0), (0.0, ModelParams(2, 3), 0.0),
                                            (12 / 13, ModelParams(0, 1), 1.0)])
    def test_speed_examples(self, a, params, c):
        assert speed_for_amplitude(a, params) == pytest.approx(c, rel=1e-15, abs=0)

    @given(st.floats(-3, 3), st.floats(0, 3), st.floats(-3, 3))
    def test_roots_reproduce_speed(self, c, k1, k2):
        assume(k1 > 1e-3 or abs(k2) > 1e-3)
        params = ModelParams(k1, k2)
        try:
            sol = amplitude_for_speed(c, params)
        except NoRealPeakonError:
            assert k1 > 0 and c < -169 * k2 * k2 / (1200 * k1)
            return
        for a in sol.roots:
            # residual of the quadratic, relative to the size of its terms
            terms = 25 / 12 * k1 * a * a + abs(13 / 12 * k2 * a) + abs(c)
            resid = speed_for_amplitude(a, params) - c
            assert abs(resid) <= 1e-12 * max(terms, 1e-300) or (sol.degenerate and abs(resid) < 1e-9 * max(terms, 1.0))


class TestSampleField:
    def test_single(self):
        x = np.arange(64) / 64
        u = sample_field(PeakonSystem([0.7], [0.2]), 64)
        np.testing.assert_array_equal(u, 0.7 * G.green_g(x - 0.2))

    def test_pair_has_zero_mean(self):
        u = sample_field(PeakonSystem([1.0, -1.0], [0.25, 0.75]), 256)
        assert abs(np.mean(u)) < 1e-14

    def test_empty(self):
        u = sample_field(PeakonSystem([], []), G.PeriodicGrid(32))
        np.testing.assert_array_equal(u, np.zeros(32))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            PeakonSystem([1.0, 2.0], [0.1])

    def test_sorted_keeps_labels(self):
        s = PeakonSystem([1.0, 2.0, 3.0], [0.9, 1.2, -0.4]).sorted()
        np.testing.assert_allclose(s.q, [0.2, 0.6, 0.9])
        np.testing.assert_array_equal(s.ids, [1, 2, 0])
        np.testing.assert_array_equal(s.p, [2.0, 3.0, 1.0])


class TestRhs:
    def test_single_peakon_unit_speed(self):
        dp, dq = multipeakon_rhs(PeakonSystem([0.48], [0.3]), ModelParams(1, 1))
        assert dp[0] == 0.0
        assert dq[0] == pytest.approx(1.0, rel=1e-15)

    def test_single_peakon_k1_zero(self):
        dp, dq = multipeakon_rhs(PeakonSystem([12 / 13], [0.5]), ModelParams(0, 1))
        assert dp[0] == 0.0
        assert dq[0] == pytest.approx(1.0, rel=1e-15)

    def test_two_peakon_amplitude_rate(self):
        dp, _ = multipeakon_rhs(PeakonSystem([0.375, 0.375], [0.0, 0.75]), ModelParams(0, 1))
        assert dp[0] == pytest.approx(0.03515625, rel=1e-15)
        assert dp[0] + dp[1] == 0.0

    def test_collision(self):
        with pytest.raises(CollisionError):
            multipeakon_rhs(PeakonSystem([1.0, 1.0], [0.3, 0.3 + 1e-12]), ModelParams())

    def test_unknown_variant(self):
        with pytest.raises(ValueError):
            multipeakon_rhs(PeakonSystem([1.0], [0.0]), ModelParams(), variant="other")

    def test_output_follows_input_order(self):
        sys = PeakonSystem([0.3, 0.5, -0.2], [0.8, 0.1, 0.45])
        dp, dq = multipeakon_rhs(sys, ModelParams(1, 1))
        s = sys.sorted()
        dps, dqs = multipeakon_rhs(s, ModelParams(1, 1))
        np.testing.assert_allclose(dp[s.ids], dps, rtol=0, atol=1e-15)
        np.testing.assert_allclose(dq[s.ids], dqs, rtol=0, atol=1e-15)

    @pytest.mark.parametrize("variant", ["eq44", "printed"])
    def test_alternative_variants_run(self, variant):
        dp, dq = multipeakon_rhs(PeakonSystem([0.3, 0.5], [0.1, 0.6]), ModelParams(1, 1), variant)
        assert np.all(np.isfinite(dq))
        assert dp.shape == (2,)

    def test_reconciled_matches_eq44_at_n1(self):
        sys = PeakonSystem([0.6], [0.4])
        a = multipeakon_rhs(sys, ModelParams(1.3, 0.7))
        b = multipeakon_rhs(sys, ModelParams(1.3, 0.7), "eq44")
        assert a[1][0] == pytest.approx(b[1][0], rel=1e-15)

    @given(st.lists(st.tuples(st.floats(-2, 2), st.floats(0, 1, exclude_max=True)), min_size=1, max_size=6),
           st.floats(0, 2), st.floats(-2, 2))
    def test_amplitude_sum_is_stationary(self, peaks, k1, k2):
        p, q = map(np.array, zip(*peaks))
        assume(min_gap(q) > 1e-6)
        dp, _ = multipeakon_rhs(PeakonSystem(p, q), ModelParams(k1, k2))
        assert abs(dp.sum()) <= 1e-14 * max(1.0, np.sum(np.abs(dp)))

    @given(st.sampled_from([0.0, 0.5, 1.0]), st.sampled_from([0.0, 0.5, 1.0]), st.floats(0.1, 3.0))
    def test_single_peakon_matches_travelling_wave(self, k1, k2, c):
        assume(k1 or k2)
        params = ModelParams(k1, k2)
        for a in amplitude_for_speed(c, params).roots:
            dp, dq = multipeakon_rhs(PeakonSystem([a], [0.2]), params)
            assert dp[0] == 0.0
            assert abs(dq[0] - c) <= 1e-12 * c


class TestClosedForm:
    params = ModelParams(0, 1)

    def test_symmetry_point(self):
        s = two_peakon_closed_form(0.75, 0.1, 0.2, 3.0, 0.0, 3.0, self.params)
        assert s.p[0] == s.p[1] == 0.375

    @given(st.floats(-50, 50))
    def test_sum_exact(self, t):
        s = two_peakon_closed_form(0.75, 0.1, 0.1875, 0.0, 0.0, t, self.params)
        assert s.p.sum() == pytest.approx(0.75, rel=1e-15, abs=0)

    def test_late_limit(self):
        b = 0.1875
        s = two_peakon_closed_form(0.75, 0.0, b, 0.0, 0.0, 40.0 / b, self.params)
        assert abs(s.p[0] - 0.75) < 1e-15
        assert abs(s.p[1]) < 1e-15

    def test_positions(self):
        s = two_peakon_closed_form(0.75, 0.0, 0.1875, 0.0, 0.0, 1.3, self.params)
        assert np.all((0 <= s.q) & (s.q < 1))
        assert (s.q[1] - s.q[0]) % 1.0 == pytest.approx(0.75)

    def test_requires_positive_b(self):
        with pytest.raises(ValueError):
            two_peakon_closed_form(0.75, 0.0, 0.0, 0.0, 0.0, 1.0, self.params)


class TestIntegratePeakons:
    def test_single_peakon_returns_after_unit_time(self):
        traj = integrate_peakons(PeakonSystem([0.48], [0.3]), 1.0, ModelParams(1, 1), TIGHT)
        assert abs(traj.q[-1, 0] % 1.0 - 0.3) < 1e-9
        assert np.all(traj.p == 0.48)

    def test_translation_is_exact(self):
        params = ModelParams(1, 1)
        sys0 = PeakonSystem([0.48], [0.3])
        traj = integrate_peakons(sys0, 0.37, params, TIGHT)
        n = 128
        x = np.arange(n) / n
        moved = sample_field(traj.system(), n)
        np.testing.assert_allclose(moved, 0.48 * G.green_g(x - 0.3 - 0.37), rtol=0, atol=1e-12)

    def test_sum_p_drift(self):
        traj = integrate_peakons(PeakonSystem([0.5, 0.25], [0.1, 0.6]), 10.0, ModelParams(1, 1), TIGHT)
        assert np.max(np.abs(traj.sum_p - traj.sum_p[0])) < 1e-12

    def test_sample_times_are_hit(self):
        times = np.linspace(0.0, 1.0, 11)
        traj = integrate_peakons(PeakonSystem([0.48], [0.3]), 1.0, ModelParams(1, 1), sample_times=times)
        np.testing.assert_array_equal(traj.t, times)

    def test_coincident_start_rejected(self):
        with pytest.raises(CollisionError):
            integrate_peakons(PeakonSystem([2.0, 0.1], [0.4, 0.4]), 1.0, ModelParams(1, 0))

    def test_amplitudes_follow_logistic_law_with_frozen_gap(self):
        # amplitude equations alone, gap held at a: logistic exchange at rate b
        params = ModelParams(0, 1)
        a, b = 0.75, 0.1875
        q = np.array([0.0, a])
        p = np.array([a / 2, a / 2])
        f = lambda t, y: multipeakon_rhs(PeakonSystem(y, q), params)[0]
        h, t = 0.01, 0.0
        worst = 0.0
        for _ in range(1000):
            p = rk4(f, t, p, h)
            t += h
            exact = two_peakon_closed_form(a, 0.0, b, 0.0, 0.0, t, params).p
            worst = max(worst, float(np.max(np.abs(p - exact))))
        assert worst < 1e-10

    def test_two_peakon_ode_tracks_closed_form(self):
        traj, exact = V.two_peakon_comparison()
        assert np.max(np.abs(traj.p[:, 0] - exact)) < 1e-6
