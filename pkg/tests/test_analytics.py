import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shallowxeb import analytics as an
from shallowxeb.analytics import DepthNoiseParams as P

# Frozen values from 50-digit mpmath evaluations of the defining expressions.
H_09 = 0.32508297339144824
H_06 = 0.6730116670092564
LOGIT_0525 = 0.10008345855698254
LOG_B_100_50_02 = 2.0410997260127565
MEAN_20_01_05 = 13.839991939173302
VAR_100_02_0 = 5.590580960284197
MOMENT_10_3_02_3 = 3.450383993202728e-08
LINEAR_RATIO_30_005 = 2.1543624088281937
A_FROM_0688 = 0.10137399394970199
A_FROM_0692 = 0.04789032926152373


def quiet(fn, *args):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", an.UnreliableRegimeWarning)
        return fn(*args)


class TestParams:
    def test_scaling_constructor_is_exact(self):
        p = P.from_scaling(100, 0.25, 2.0)
        assert p.a == 100 ** -0.25
        assert p.signal == p.a ** 2.0

    @pytest.mark.parametrize("kw", [dict(n=0, a=0.1), dict(n=4, a=1.0), dict(n=4, a=-0.1), dict(n=4, a=0.1, signal=1.5)])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(ValueError):
            P(**kw)

    def test_validity_flag(self):
        assert P(10, 0.25).valid
        assert not P(10, 0.26).valid

    def test_warning_outside_trusted_regime(self):
        with pytest.warns(an.UnreliableRegimeWarning):
            an.logxeb_mean(P(10, 0.3))


class TestEntropyLogit:
    def test_entropy_values(self):
        assert an.entropy_nats(0.5) == pytest.approx(math.log(2), abs=1e-15)
        assert an.entropy_nats(0.0) == 0.0 and an.entropy_nats(1.0) == 0.0
        assert an.entropy_nats(0.9) == pytest.approx(H_09, rel=1e-14)

    def test_entropy_domain(self):
        with pytest.raises(ValueError):
            an.entropy_nats(1.1)

    def test_logit_values(self):
        assert an.logit(0.5) == 0.0
        assert an.logit(0.75) == pytest.approx(math.log(3), rel=1e-14)
        assert an.logit(0.525) == pytest.approx(LOGIT_0525, rel=1e-13)

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_logit_endpoints(self, p):
        with pytest.raises(ValueError):
            an.logit(p)


class TestWeightsAndMoments:
    def test_weight_factor(self):
        assert an.weight_factor(7, 3, 0.0) == 1.0
        assert an.weight_factor(2, 1, 0.1) == pytest.approx(1 / (0.9 * 1.1), rel=1e-14)
        assert an.log_weight_factor(100, 50, 0.2) == pytest.approx(LOG_B_100_50_02, rel=1e-13)

    def test_probability_moment(self):
        n = 6
        for k in (1, 2, 3):
            assert an.probability_moment(n, 2, 0.0, k) == pytest.approx(math.factorial(k) / 2.0 ** (n * k), rel=1e-13)
        assert an.probability_moment(1, 0, 0.1, 1) == pytest.approx(0.55, rel=1e-14)
        assert an.probability_moment(10, 3, 0.2, 3) == pytest.approx(MOMENT_10_3_02_3, rel=1e-12)

    def test_summed_moment_limits(self):
        n = 12
        assert an.summed_moment(P(n, 0.0, 1.0), 1) == pytest.approx(2 / 2 ** n, rel=1e-13)
        a = 0.2
        assert an.summed_moment(P(n, a, 0.0), 1) == pytest.approx(2.0 ** -n * (1 + a * a) ** n, rel=1e-13)

    @pytest.mark.parametrize("k", [1, 3, 6])
    def test_weight_sum_matches_closed_form(self, k):
        for n in (1, 7, 20, 300):
            p = P(n, 0.2, 0.4)
            assert an.hamming_sum_log_moment(p, k) == pytest.approx(an.log_summed_moment(p, k), rel=1e-12)

    @pytest.mark.parametrize("n", [1, 10, 100, 1000])
    @pytest.mark.parametrize("a", [0.0, 0.1, 0.25])
    def test_partition_identity(self, n, a):
        # sum_x C(n,x)/b_x = 2^n, checked in log space
        total = np.logaddexp.reduce(an.log_binomials(n) - an.log_weight_factor(n, np.arange(n + 1), a))
        assert abs(total / (n * an.LOG2) - 1) < 1e-10

    def test_large_n_against_mpmath(self):
        mpmath.mp.dps = 40
        n, a, s, k = 2000, 0.05, 0.3, 3
        exact = (mpmath.factorial(k) / mpmath.mpf(2) ** (n * (k + 1))
                 * ((1 - mpmath.mpf(a)) ** (k + 1) + (1 + mpmath.mpf(a)) ** (k + 1)) ** n * (1 + k * mpmath.mpf(s)))
        assert an.log_summed_moment(P(n, a, s), k) == pytest.approx(float(mpmath.log(exact)), rel=1e-12)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            an.log_summed_moment(P(4, 0.1), 0)


class TestLogXeb:
    def test_clean_limits(self):
        n = 37
        assert an.logxeb_mean(P(n, 0.0, 1.0)) == pytest.approx(n * math.log(2) + an.EULER_GAMMA - 1, abs=1e-12)
        assert an.logxeb_var(P(n, 0.0, 1.0)) == pytest.approx(math.pi ** 2 / 6 - 1, abs=1e-12)
        assert an.logxeb_mean(P(n, 0.0, 0.0)) == n * math.log(2) + an.EULER_GAMMA
        assert an.logxeb_var(P(n, 0.0, 0.0)) == math.pi ** 2 / 6

    def test_frozen_values(self):
        assert an.logxeb_mean(P(20, 0.1, 0.5)) == pytest.approx(MEAN_20_01_05, rel=1e-13)
        assert an.logxeb_var(P(100, 0.2, 0.0)) == pytest.approx(VAR_100_02_0, rel=1e-13)

    @given(st.floats(0.0, 0.25), st.floats(0.0, 0.99), st.floats(0.001, 0.01))
    def test_mean_decreasing_in_signal(self, a, s, ds):
        assert an.logxeb_mean(P(50, a, s + ds)) < an.logxeb_mean(P(50, a, s))

    def test_required_samples(self):
        assert an.required_samples(P(10, 0.0, 1.0)) == 1
        assert quiet(an.required_samples, P.from_scaling(100, 0.25, 1.0)) == 112
        with pytest.raises(ValueError):
            an.required_samples(P(10, 0.1, 0.0))

    def test_required_samples_decreasing_in_signal(self):
        m = [an.required_samples(P(100, 0.1, s)) for s in (0.1, 0.2, 0.4, 0.8)]
        assert all(b < a for a, b in zip(m, m[1:]))

    def test_required_samples_matches_monte_carlo_standard_error(self):
        # spread of m-sample log-XEB estimates, with scores drawn from the exact score mixture
        from shallowxeb.distributions import sample_scores

        rng = np.random.default_rng(5)
        params = P.from_scaling(100, 0.25, 1.0)
        m = quiet(an.required_samples, params)
        var = quiet(an.logxeb_var, params)
        z = sample_scores(params, 3000 * m, rng).reshape(3000, m)
        estimates = (params.n * math.log(2) - np.log(z)).mean(axis=1)
        se = estimates.std(ddof=1)
        assert se == pytest.approx(an.standard_error(var, m), rel=0.05)
        assert se <= params.signal * 1.05
        assert quiet(an.standard_error, var, m - 1) > params.signal

    def test_asymptotic_forms(self):
        assert an.asymptotic_required_samples(1000, 0.25, 1.0) == pytest.approx(1000.0)
        assert an.asymptotic_required_samples(100, 0.75, 1.0) == pytest.approx(math.pi ** 2 / 6 * 100 ** 1.5)

    def test_standard_error(self):
        assert an.standard_error(4.0, 16) == 0.5
        with pytest.raises(ValueError):
            an.standard_error(1.0, 0)

    def test_prediction_bundle(self):
        pred = an.predict_logxeb(P.from_scaling(100, 0.25, 1.0))
        assert pred.required_samples == 112
        assert not pred.reliable
        assert pred.asymptotic_samples == pytest.approx(100.0)


class TestLinearXeb:
    def test_porter_thomas(self):
        lin = an.linear_xeb(P(20, 0.0, 1.0))
        assert lin.mean == pytest.approx(2 / 2 ** 20, rel=1e-13)
        assert lin.second_moment == pytest.approx(6 / 2 ** 40, rel=1e-13)
        assert lin.moment_ratio == pytest.approx(1.5, rel=1e-13)

    def test_ratio_grows_exponentially(self):
        ratios = [quiet(an.linear_xeb, P(n, 0.3, 1.0)).moment_ratio for n in (10, 20, 40, 80)]
        factors = [b / a for a, b in zip(ratios, ratios[1:])]
        base = (1 + 3 * 0.09) / (1 + 0.09) ** 2
        assert base > 1
        for f, steps in zip(factors, (10, 20, 40)):
            assert f == pytest.approx(base ** steps, rel=1e-10)

    def test_frozen_ratio(self):
        ratio = an.linear_xeb(P(30, 0.05, 0.0)).moment_ratio
        assert ratio == pytest.approx(LINEAR_RATIO_30_005, rel=1e-12)
        assert ratio == pytest.approx(2 * (1 + 30 * 0.05 ** 2), abs=30 ** 2 * 0.05 ** 4 * 2)

    def test_large_n_does_not_underflow(self):
        lin = an.linear_xeb(P(5000, 0.01, 1.0))
        assert math.isfinite(lin.log_mean) and lin.mean == 0.0


class TestDepthFromSlope:
    def test_values(self):
        assert an.depth_from_slope(math.log(2)) == 0.0
        assert an.depth_from_slope(0.688) == pytest.approx(A_FROM_0688, abs=1e-11)
        assert an.depth_from_slope(0.692) == pytest.approx(A_FROM_0692, abs=1e-11)
        assert an.depth_from_slope(H_06) == pytest.approx(0.2, abs=1e-10)

    @given(st.floats(0.0, 0.25))
    @settings(max_examples=200)
    def test_round_trip(self, a):
        slope = an.entropy_nats((1 + a) / 2)
        if slope == math.log(2):
            return
        assert an.depth_from_slope(slope) == pytest.approx(a, abs=1e-10 if a > 1e-4 else 2e-6)

    @pytest.mark.parametrize("slope", [0.0, -0.1, 0.7])
    def test_out_of_range(self, slope):
        with pytest.raises(ValueError):
            an.depth_from_slope(slope)
