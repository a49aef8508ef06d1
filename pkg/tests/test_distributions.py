import csv
import math

import numpy as np
import pytest
from scipy.integrate import quad

from shallowxeb import distributions as dist
from shallowxeb.analytics import DepthNoiseParams as P
from shallowxeb.analytics import linear_xeb


def integrate(f, points=(1.0,)):
    # split at the bulk so quad resolves the exponential decay
    lo, _ = quad(f, 0.0, 1.0, epsabs=1e-13, epsrel=1e-12, limit=200)
    hi, _ = quad(f, 1.0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
    return lo + hi


class TestDensities:
    def test_fixed_weight_porter_thomas(self):
        q = np.linspace(0, 0.01, 11)
        d = 2.0 ** 8
        assert np.allclose(dist.pdf_fixed_weight(q, 8, 3, 0.0), d * np.exp(-d * q), rtol=1e-13)

    def test_fixed_weight_normalisation_and_mean(self):
        from shallowxeb.analytics import probability_moment

        f = lambda q: dist.pdf_fixed_weight(q, 10, 4, 0.2)
        total, _ = quad(f, 0, np.inf, epsabs=1e-13)
        mean, _ = quad(lambda q: q * f(q), 0, np.inf, epsabs=1e-16, epsrel=1e-12)
        assert total == pytest.approx(1.0, abs=1e-10)
        assert mean == pytest.approx(probability_moment(10, 4, 0.2, 1), rel=1e-8)

    def test_averaged_limits(self):
        z = np.linspace(0, 10, 50)
        assert np.allclose(dist.pdf_averaged(z, 30, 0.0), np.exp(-z), rtol=1e-12)
        assert integrate(lambda t: dist.pdf_averaged(t, 100, 0.1)) == pytest.approx(1.0, abs=1e-8)

    def test_overlay_convergence(self):
        a_values = [0.1, 0.05, 0.025, 0.0125, 0.00625]
        d = [dist.sup_distance_to_porter_thomas(100, a) for a in a_values]
        assert all(b < a for a, b in zip(d, d[1:]))

    @pytest.mark.parametrize("s", [0.0, 0.5, 1.0])
    def test_score_pdf_normalised_nonnegative(self, s):
        params = P(80, 0.15, s)
        assert integrate(lambda t: dist.score_pdf(t, params)) == pytest.approx(1.0, abs=1e-8)
        assert np.all(dist.score_pdf(dist.scan_grid(80), params) >= -1e-300)

    @pytest.mark.parametrize("n,a,s", [(20, 0.2, 1.0), (60, 0.1, 0.3), (40, 0.0, 0.0)])
    def test_first_moment_matches_linear_xeb(self, n, a, s):
        params = P(n, a, s)
        m1 = integrate(lambda t: t * dist.score_pdf(t, params))
        expected = 2.0 ** n * linear_xeb(params).mean
        assert m1 == pytest.approx(expected, rel=1e-8)
        assert math.exp(dist.log_mean_score(params)) == pytest.approx(expected, rel=1e-12)

    def test_affine_in_signal(self):
        z = dist.scan_grid(40)
        s0 = dist.score_pdf(z, P(40, 0.2, 0.0))
        s1 = dist.score_pdf(z, P(40, 0.2, 1.0))
        s = dist.score_pdf(z, P(40, 0.2, 0.37))
        assert np.allclose(s, s0 + 0.37 * (s1 - s0), rtol=1e-11, atol=1e-300)

    def test_large_n_stays_finite(self):
        out = dist.score_pdf(np.array([0.5, 1.0, 3.0]), P(2000, 2000 ** -0.5, 1.0))
        assert np.all(np.isfinite(out)) and np.all(out > 0)

    def test_negative_score_rejected(self):
        with pytest.raises(ValueError):
            dist.score_pdf(-1.0, P(4, 0.1))


class TestDelta:
    def test_difference_of_densities(self):
        z = dist.scan_grid(30)
        diff = dist.score_pdf(z, P(30, 0.2, 1.0)) - dist.score_pdf(z, P(30, 0.2, 0.0))
        assert np.allclose(dist.score_delta(z, 30, 0.2), diff, rtol=1e-9, atol=1e-14)

    def test_integrates_to_zero(self):
        assert integrate(lambda t: dist.score_delta(t, 50, 0.1)) == pytest.approx(0.0, abs=1e-9)

    def test_porter_thomas_case(self):
        z = np.linspace(0, 5, 21)
        assert np.allclose(dist.score_delta(z, 10, 0.0), (z - 1) * np.exp(-z), atol=1e-14)
        assert dist.threshold_score(10, 0.0) == 1.0

    def test_root_above_one_for_deeper_circuit(self):
        roots = dist.delta_roots(100, 0.2)
        assert len(roots) == 1 and roots[0] > 1

    def test_single_crossing_sign_pattern(self):
        n, a = 100, 0.1
        z_star = dist.threshold_score(n, a)
        grid = dist.scan_grid(n)
        vals = dist.score_delta(grid, n, a)
        assert np.all(vals[grid < z_star * 0.999] < 0)
        # far tail underflows to zero, so only require no negative values there
        assert np.all(vals[grid > z_star * 1.001] >= 0)
        assert np.all(vals[(grid > z_star * 1.001) & (grid < 20)] > 0)

    def test_shallower_means_larger_threshold(self):
        assert dist.threshold_score(100, 100 ** -0.25) > dist.threshold_score(100, 100 ** -0.5)

    def test_no_root_reports_grid(self, monkeypatch):
        monkeypatch.setattr(dist, "scan_grid", lambda n: np.geomspace(1e-4, 0.5, 20))
        with pytest.raises(dist.ThresholdNotFound) as info:
            dist.delta_roots(10, 0.1)
        assert len(info.value.grid) == 20 and len(info.value.values) == 20


class TestTailsAndGap:
    def test_tail_simple_values(self):
        assert dist.score_tail(0.0, P(20, 0.1, 0.7)) == pytest.approx(1.0, rel=1e-12)
        assert dist.score_tail(1.0, P(10, 0.0, 1.0)) == pytest.approx(2 * math.exp(-1), rel=1e-13)

    def test_tail_matches_quadrature(self):
        params = P(50, 0.1, 0.5)
        z0 = dist.threshold_score(50, 0.1)
        tail, _ = quad(lambda t: dist.score_pdf(t, params), z0, np.inf, epsabs=1e-13, epsrel=1e-12, limit=400)
        assert dist.score_tail(z0, params) == pytest.approx(tail, abs=1e-8)

    def test_gap_consistency(self):
        b = dist.probability_gap(200, 200 ** -0.5)
        assert b.gap == pytest.approx(b.p_clean - b.p_spoof, abs=1e-10)
        assert b.gap > 0 and b.z_star > 0 and not b.multiple_roots

    def test_gap_porter_thomas(self):
        b = dist.probability_gap(20, 0.0)
        assert b.z_star == 1.0
        assert b.gap == pytest.approx(math.exp(-1), rel=1e-13)

    def test_gap_regimes(self):
        ns = [50, 100, 200]
        low = [dist.probability_gap(n, n ** -0.3).gap for n in ns]
        high = [dist.probability_gap(n, n ** -0.75).gap for n in ns]
        assert low[0] > low[1] > low[2]
        assert high[0] <= high[1] <= high[2]


class TestSamplingAndTables:
    def test_sampled_moments(self):
        # oracle for the sampler: mean (1+a^2)^n (1+s) and tail at z*
        rng = np.random.default_rng(3)
        params = P(40, 0.1, 0.6)
        z = dist.sample_scores(params, 400_000, rng)
        expected = (1 + 0.01) ** 40 * 1.6
        assert z.mean() == pytest.approx(expected, abs=4 * z.std() / math.sqrt(z.size))
        z0 = 1.3
        p = dist.score_tail(z0, params)
        assert np.mean(z > z0) == pytest.approx(p, abs=4 * math.sqrt(p * (1 - p) / z.size))

    def test_weight_mass_sums_to_one(self):
        w = dist.WeightTable(300, 0.2)
        assert w.mass.sum() == pytest.approx(1.0, rel=1e-12)

    def test_score_table(self, tmp_path):
        path = tmp_path / "z.csv"
        dist.write_score_table(path, 30, 0.1, z=[0.5, 1.0, 2.0])
        rows = list(csv.DictReader(open(path)))
        assert list(rows[0]) == ["z", "S_clean", "S_spoof", "delta"]
        for r in rows:
            assert float(r["delta"]) == pytest.approx(float(r["S_clean"]) - float(r["S_spoof"]), abs=1e-14)

    def test_distribution_wrapper(self, rng):
        sd = dist.ScoreDistribution(P(20, 0.1, 1.0))
        assert sd.pdf().shape == sd.grid.shape
        assert sd.tail(0.0) == pytest.approx(1.0)
        assert sd.sample(5, rng).shape == (5,)
