import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import norm

from ffspread.slope import (EXACT_ENUM_BUDGET, g_closed_form, g_oracle,
                            predict_ber, slope_report, standard_slope,
                            standard_slope_exact)


class TestClosedForm:
    def test_s1_is_L_minus_1(self):
        for L in (1, 2, 5, 16):
            assert g_closed_form(1, L) == Fraction(L - 1)

    def test_L1_is_zero(self):
        for s in (1, 2, 6):
            assert g_closed_form(s, 1) == Fraction(0)

    def test_g22_exact_value(self):
        assert g_closed_form(2, 2) == Fraction(10, 9)

    def test_matches_enumeration_oracle(self):
        pairs = [(s, L) for s in (1, 2, 3) for L in (1, 2, 3)] + [(2, 4), (2, 5)]
        for s, L in pairs:
            oracle = g_oracle(s, L, mode="exact")
            assert g_closed_form(s, L) == oracle.value, (s, L)

    def test_s3_L2_cross_validation(self):
        # 7^4 = 2401 joint realizations, enumerated exactly
        oracle = g_oracle(3, 2, mode="exact")
        assert oracle.method == "exact enumeration"
        assert g_closed_form(3, 2) == oracle.value

    def test_monotone_in_s_and_L(self):
        for L in (3, 4, 8, 16):
            for s in (1, 2, 3, 4, 5):
                assert g_closed_form(s + 1, L) > g_closed_form(s, L)
        for s in (2, 4):
            for L in (2, 4, 8):
                assert g_closed_form(s, L + 1) > g_closed_form(s, L)

    def test_known_exception_at_L2(self):
        # at L=2 the slope decreases toward 1 as s grows: the joint-spreading
        # gain over one remaining observation shrinks with field size
        vals = [g_closed_form(s, 2) for s in (2, 3, 4, 5, 6)]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert all(v > 1 for v in vals)

    def test_strictly_above_repetition_gain(self):
        for s in (2, 3, 6):
            for L in (2, 8, 16):
                assert g_closed_form(s, L) > Fraction(L - 1)

    def test_bounds(self):
        for s in (1, 2, 4, 6):
            for L in (1, 2, 8, 16):
                g = g_closed_form(s, L)
                assert Fraction(max(L - 1, 0)) <= g <= Fraction(s * (L - 1) + 1)

    def test_invalid_args(self):
        with pytest.raises(ValueError):
            g_closed_form(0, 2)
        with pytest.raises(ValueError):
            g_closed_form(2, 0)


class TestOracle:
    def test_exact_budget_refusal(self):
        # (4, 4) needs 15^24 realizations, far over budget
        with pytest.raises(ValueError, match="montecarlo"):
            g_oracle(4, 4, mode="exact")
        assert (2**4 - 1) ** ((4 - 1) * 2**3) > EXACT_ENUM_BUDGET

    def test_s1_degenerate(self):
        res = g_oracle(1, 6, mode="exact")
        assert res.value == Fraction(5)

    def test_montecarlo_matches_closed_form(self):
        res = g_oracle(2, 8, mode="montecarlo", samples=200_000, seed=1)
        g = float(g_closed_form(2, 8))
        assert abs(res.value - g) < 4 * res.std_error

    def test_bad_mode(self):
        with pytest.raises(ValueError, match="mode"):
            g_oracle(2, 2, mode="guess")


class TestStandardSlope:
    def test_s1_always_one(self):
        for L in (1, 2, 8, 16):
            assert standard_slope_exact(1, L) == Fraction(1)

    def test_table_values_L8(self):
        assert round(standard_slope(2, 8), 4) == 1.2411
        assert round(standard_slope(4, 8), 4) == 1.7002
        assert round(standard_slope(6, 8), 4) == 2.2095

    def test_table_values_L16(self):
        assert round(standard_slope(2, 16), 4) == 1.2675
        assert round(standard_slope(4, 16), 4) == 1.8240
        # exact rational evaluates to 2.44924537..., one ulp under the
        # published rounding
        assert abs(standard_slope(6, 16) - 2.4493) < 1e-4

    def test_near_one_at_L1(self):
        for s in range(1, 7):
            assert abs(standard_slope(s, 1) - 1.0) <= 0.12

    def test_above_one_for_joint_spreading(self):
        for s in (2, 3, 6):
            for L in (2, 8):
                assert standard_slope(s, L) > 1.0


class TestPredictBer:
    def test_s1_is_single_user_bpsk(self):
        x = np.array([1.0, 4.0, 6.31])
        est, _ = predict_ber(1, 4, x)
        assert np.allclose(est, norm.sf(np.sqrt(2 * x)), rtol=1e-12)

    def test_estimate_below_bound(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            s = int(rng.integers(1, 7))
            L = int(rng.integers(1, 17))
            x = float(rng.uniform(0.1, 20.0))
            est, bound = predict_ber(s, L, x)
            assert est < bound

    def test_bound_from_table_value(self):
        _, bound = predict_ber(2, 8, 8.0)
        assert bound == pytest.approx(
            math.exp(-float(standard_slope_exact(2, 8)) * 8.0), rel=1e-12)
        assert bound == pytest.approx(math.exp(-1.2411 * 8.0), rel=1e-3)

    def test_invalid_ebn0(self):
        with pytest.raises(ValueError):
            predict_ber(2, 8, 0.0)


class TestSlopeReport:
    def test_exact_mode_selected_when_feasible(self):
        rep = slope_report(2, 3)
        assert rep.g_oracle.method == "exact enumeration"
        assert rep.g_closed == rep.g_oracle.value
        assert rep.g_std == standard_slope(2, 3)

    def test_mc_mode_selected_when_over_budget(self):
        rep = slope_report(4, 8, samples=20_000, seed=3)
        assert rep.g_oracle.method == "monte carlo"
        assert abs(rep.g_oracle.value - rep.g_closed_float) < 5 * rep.g_oracle.std_error
