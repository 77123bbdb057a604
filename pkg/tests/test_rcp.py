import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from rpaslab import channel, rcp


def master_equation_availability(lam_on, lam_off, t):
    """Independent oracle: integrate dP/dt = lam_on - (lam_on+lam_off) P."""
    sol = solve_ivp(
        lambda _, p: lam_on - (lam_on + lam_off) * p,
        (0.0, t),
        [1.0],
        rtol=1e-12,
        atol=1e-14,
        dense_output=True,
    )
    return float(sol.y[0, -1])


class TestRates:
    def test_negative_rates_rejected(self):
        with pytest.raises(ValueError):
            rcp.RcpRates(-0.1, 0.5)

    def test_both_zero_rejected(self):
        with pytest.raises(ValueError):
            rcp.RcpRates(0.0, 0.0)

    def test_unit_sum_flag_enforced(self):
        with pytest.raises(ValueError):
            rcp.RcpRates(0.6, 0.6, unit_sum=True)
        r = rcp.RcpRates(0.6, 0.4, unit_sum=True)
        assert rcp.steady_state_availability(r) == pytest.approx(0.6, abs=1e-15)

    def test_from_availability(self):
        r = rcp.RcpRates.from_availability(0.8)
        assert r.unit_sum
        assert r.lambda_on == 0.8
        assert r.lambda_off == pytest.approx(0.2)


class TestAvailability:
    def test_initial_condition(self):
        assert rcp.availability_at(rcp.RcpRates(0.6, 0.4), 0.0) == 1.0

    def test_steady_state_limit(self):
        r = rcp.RcpRates(0.6, 0.4)
        assert rcp.availability_at(r, 1e9) == pytest.approx(0.6, abs=1e-12)

    def test_symmetric_case_analytic_and_ode(self):
        # 0.5*(1 + e^-t) at t = ln 2 is exactly 0.75
        r = rcp.RcpRates(0.5, 0.5)
        t = math.log(2.0)
        assert rcp.availability_at(r, t) == pytest.approx(0.75, abs=1e-12)
        assert master_equation_availability(0.5, 0.5, t) == pytest.approx(0.75, abs=1e-9)

    @pytest.mark.parametrize("lam_on,lam_off,t", [(0.6, 0.4, 0.7), (2.0, 0.3, 1.3), (0.05, 0.9, 4.0)])
    def test_matches_master_equation(self, lam_on, lam_off, t):
        closed = rcp.availability_at(rcp.RcpRates(lam_on, lam_off), t)
        assert closed == pytest.approx(master_equation_availability(lam_on, lam_off, t), abs=1e-9)

    def test_negative_time_rejected(self):
        with pytest.raises(ValueError):
            rcp.availability_at(rcp.RcpRates(0.5, 0.5), -1.0)

    def test_monotone_nonincreasing_to_steady_state(self):
        r = rcp.RcpRates(0.7, 0.3)
        ts = np.linspace(0.0, 30.0, 200)
        vals = [rcp.availability_at(r, t) for t in ts]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))
        assert vals[-1] >= rcp.steady_state_availability(r) - 1e-12


class TestSteadyState:
    def test_symmetry(self):
        assert rcp.steady_state_availability(rcp.RcpRates(0.3, 0.3)) == 0.5

    def test_never_leaves_on(self):
        assert rcp.steady_state_availability(rcp.RcpRates(0.7, 0.0)) == 1.0

    def test_equals_expected_sojourn_ratio(self):
        r = rcp.RcpRates(0.8, 0.2)
        ratio = r.mean_on_s / (r.mean_on_s + r.mean_off_s)
        assert rcp.steady_state_availability(r) == pytest.approx(ratio, abs=1e-15)

    def test_empirical_on_fraction(self):
        # long sampled realization of the same chain, unit-sum convention
        sched = channel.sample_link_schedule(0.8, horizon=1e5, seed=314159)
        assert sched.on_fraction() == pytest.approx(0.8, abs=0.01)


class TestContinuity:
    def test_empty_interval(self):
        assert rcp.continuity(rcp.RcpRates(0.2, 0.8), 0.0) == 1.0

    def test_analytic_half(self):
        assert rcp.continuity(rcp.RcpRates(1.0, 1.0), math.log(2.0)) == pytest.approx(
            0.5, abs=1e-12
        )

    def test_negative_duration_rejected(self):
        with pytest.raises(ValueError):
            rcp.continuity(rcp.RcpRates(0.5, 0.5), -0.1)

    def test_survival_of_sampled_intervals(self):
        # empirical P(T_on >= 10) with rate 0.05 from >= 1e5 sampled intervals
        p_a = 0.95  # unit-sum: lambda_off = 0.05
        mean_cycle = 1.0 / 0.05 + 1.0 / 0.95
        sched = channel.sample_link_schedule(p_a, horizon=1.1e5 * mean_cycle, seed=99)
        on_durations = sched.durations[0::2]
        assert len(on_durations) >= 1e5
        survival = float(np.mean(on_durations >= 10.0))
        assert survival == pytest.approx(math.exp(-0.05 * 10.0), abs=0.01)

    @given(
        loff=st.floats(0.01, 2.0),
        t1=st.floats(0.0, 5.0),
        t2=st.floats(0.0, 5.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_memoryless_product(self, loff, t1, t2):
        r = rcp.RcpRates(1.0, loff)
        lhs = rcp.continuity(r, t1 + t2)
        rhs = rcp.continuity(r, t1) * rcp.continuity(r, t2)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestCommunicability:
    MSG = rcp.MessageSpec(size_bits=448.0, bitrate=2400.0)

    def test_perfect_availability(self):
        assert rcp.communicability(1.0, self.MSG, 0.05) == 1.0
        assert rcp.communicability_numeric_oracle(1.0, self.MSG.tau_msg, 0.05) == 1.0

    def test_reduces_to_availability(self):
        assert rcp.communicability_from_duration(0.7, 0.0, 0.0) == pytest.approx(0.7, abs=1e-15)
        assert rcp.communicability_numeric_oracle(0.5, 0.0, 0.0) == pytest.approx(0.5, abs=1e-9)

    def test_reference_point_against_oracle(self):
        # the worked ACARS case: P_A=0.95, tau ~= 0.18667 s, eps=0.05
        closed = rcp.communicability_from_duration(0.95, 0.18667, 0.05)
        oracle = rcp.communicability_numeric_oracle(0.95, 0.18667, 0.05)
        assert closed == pytest.approx(0.9388, abs=5e-4)
        assert closed == pytest.approx(oracle, abs=1e-9)

    def test_out_of_range_availability_rejected(self):
        with pytest.raises(ValueError):
            rcp.communicability(1.2, self.MSG, 0.0)
        with pytest.raises(ValueError):
            rcp.communicability(-0.1, self.MSG, 0.0)

    def test_monotonicity(self):
        msg = self.MSG
        eps = np.linspace(0.0, 0.1, 30)
        vals = [rcp.communicability(0.9, msg, e) for e in eps]
        assert all(b <= a for a, b in zip(vals, vals[1:]))
        pas = np.linspace(0.0, 1.0, 30)
        vals = [rcp.communicability(pa, msg, 0.05) for pa in pas]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        taus = np.linspace(0.0, 2.0, 30)
        vals = [rcp.communicability_from_duration(0.9, tau, 0.05) for tau in taus]
        assert all(b <= a for a, b in zip(vals, vals[1:]))

    @given(
        pa=st.floats(0.0, 1.0),
        tau=st.floats(0.0, 2.0),
        eps=st.floats(0.0, 0.5),
    )
    @settings(max_examples=300, deadline=None)
    def test_in_unit_interval(self, pa, tau, eps):
        v = rcp.communicability_from_duration(pa, tau, eps)
        assert 0.0 <= v <= 1.0


class TestMessageDuration:
    def test_acars_value(self):
        # 448 bits at 2.4 kbps, four significant figures
        assert rcp.message_duration(448.0, 2400.0) == pytest.approx(0.1867, abs=5e-5)

    def test_zero_size_rejected(self):
        with pytest.raises(ValueError):
            rcp.message_duration(0.0, 2400.0)
        with pytest.raises(ValueError):
            rcp.message_duration(448.0, 0.0)

    def test_high_rate_link(self):
        assert rcp.message_duration(448.0, 9.2e6) == pytest.approx(4.8696e-5, rel=1e-3)
