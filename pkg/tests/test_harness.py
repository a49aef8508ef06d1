import json
import math

import numpy as np
import pytest

from shallowxeb.harness import config as hc
from shallowxeb.harness import experiment as ex
from shallowxeb.harness import plotting, report
from shallowxeb.harness.seeding import job_generator
from shallowxeb.harness.stats import estimate_stats, fit_linear, inverse_variance_weights


def small_config(**kw):
    base = dict(n_list=[4, 6, 8], depth=3, samples=40, seed=5, sampler=["noisy"], gamma_list=[0.0, 0.5],
                chunk_size=15)
    base.update(kw)
    return hc.ExperimentConfig.from_dict(base)


class TestStats:
    def test_constant_input(self):
        s = estimate_stats([2.5] * 10)
        assert (s.mean, s.variance, s.se_mean, s.se_variance, s.m) == (2.5, 0.0, 0.0, 0.0, 10)

    def test_normal_draws(self):
        rng = np.random.default_rng(0)
        s = estimate_stats(rng.normal(1.0, 2.0, 100_000))
        assert abs(s.mean - 1.0) < 4 * s.se_mean
        assert abs(s.variance - 4.0) < 4 * s.se_variance
        # normal fourth moment gives se_var ~ var * sqrt(2/m)
        assert s.se_variance == pytest.approx(4.0 * math.sqrt(2 / 100_000), rel=0.05)

    def test_too_few(self):
        with pytest.raises(ValueError):
            estimate_stats([1.0])


class TestFit:
    def test_exact_line(self):
        fit = fit_linear([(n, 2 * n + 1, 1.0) for n in range(5)])
        assert fit.slope == pytest.approx(2.0, abs=1e-12)
        assert fit.intercept == pytest.approx(1.0, abs=1e-12)
        assert fit.residual_variance == pytest.approx(0.0, abs=1e-20)
        assert fit.predict(10) == pytest.approx(21.0)

    def test_standard_errors_calibrated(self):
        rng = np.random.default_rng(1)
        x = np.array([8, 10, 12, 14, 16], float)
        sigma = np.array([0.01, 0.02, 0.02, 0.03, 0.05])
        hits = 0
        for _ in range(1000):
            y = 0.69 * x - 0.5 + rng.normal(0, sigma)
            fit = fit_linear(zip(x, y, 1 / sigma ** 2))
            hits += abs(fit.slope - 0.69) <= 3 * fit.se_slope
        assert hits >= 990

    def test_rank_deficient(self):
        with pytest.raises(ValueError):
            fit_linear([(1, 1, 1), (1, 2, 1), (1, 3, 1)])
        with pytest.raises(ValueError):
            fit_linear([(1, 1, 1), (2, 2, 1)])

    def test_weights_fall_back(self):
        assert np.all(inverse_variance_weights([0.0, 0.1]) == 1.0)
        assert inverse_variance_weights([0.1, 0.2])[0] == pytest.approx(100.0)


class TestConfig:
    def test_yaml_round_trip(self):
        c = small_config(sampler=["clean", {"kind": "spoofer", "block_size": 2}])
        assert hc.ExperimentConfig.from_yaml(c.to_yaml()) == c

    def test_grid_order(self):
        c = small_config(sampler=["uniform", "noisy"])
        tags = [(s.kind, g, n) for n, g, s in c.grid()]
        assert tags[:3] == [("uniform", 0.0, 4), ("uniform", 0.0, 6), ("uniform", 0.0, 8)]
        assert len(tags) == 3 + 6

    @pytest.mark.parametrize("bad", [dict(n_list=[5]), dict(n_list=[28]), dict(depth=0), dict(topology="ring"),
                                     dict(samples=0), dict(gamma_list=[-0.1]), dict(colour="red")])
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            small_config(**bad)

    def test_presets_load(self):
        for name in hc.PRESETS:
            hc.preset(name).validate()
        with pytest.raises(KeyError):
            hc.preset("nope")


def test_job_streams_are_independent():
    a = job_generator(3, 0).random(5)
    assert np.array_equal(a, job_generator(3, 0).random(5))
    assert not np.array_equal(a, job_generator(3, 1).random(5))
    assert not np.array_equal(a, job_generator(4, 0).random(5))


class TestExperiment:
    def test_single_record(self, tmp_path):
        c = hc.ExperimentConfig(n_list=[4], depth=2, samples=1, sampler=["uniform"], fit_slope=False)
        res = ex.run_experiment(c, out_dir=tmp_path)
        rows = ex.load_samples(tmp_path / ex.SAMPLES_FILE)
        assert len(rows) == 1 and rows[0]["sampler"] == "uniform"
        assert res.points[0].stats.m == 1 and math.isnan(res.points[0].stats.se_mean)
        assert len(rows[0]["bitstring"]) == 1

    def test_plan_splits_by_chunk(self):
        jobs = ex.plan_jobs(small_config())
        assert len(jobs) == 6 * 3
        assert [j.count for j in jobs[:3]] == [15, 15, 10]

    def test_resume_after_interruption(self, tmp_path):
        c = small_config()
        ex.run_experiment(c, out_dir=tmp_path / "full")
        ref = (tmp_path / "full" / ex.SAMPLES_FILE).read_bytes()
        ex.run_experiment(c, out_dir=tmp_path / "part")
        # simulate a kill: some job files never landed, and a stale temp file is left over
        jobs_dir = tmp_path / "part" / ex.JOBS_DIR
        for p in sorted(jobs_dir.glob("job-*.csv"))[5:]:
            p.unlink()
        (jobs_dir / "job-000007.csv.tmp").write_text("garbage")
        (tmp_path / "part" / ex.SAMPLES_FILE).unlink()
        ex.run_experiment(c, out_dir=tmp_path / "part", resume=True)
        assert (tmp_path / "part" / ex.SAMPLES_FILE).read_bytes() == ref

    def test_resume_rejects_other_config(self, tmp_path):
        ex.run_experiment(small_config(), out_dir=tmp_path)
        with pytest.raises(ValueError):
            ex.run_experiment(small_config(seed=6), out_dir=tmp_path, resume=True)

    def test_transient_failure_is_retried(self, tmp_path, monkeypatch):
        real = ex.render_job
        calls = {"n": 0}

        def flaky(config, job):
            if job.index == 2 and calls["n"] == 0:
                calls["n"] += 1
                raise OSError("disk hiccup")
            return real(config, job)

        monkeypatch.setattr(ex, "render_job", flaky)
        ex.run_experiment(small_config(), out_dir=tmp_path)
        assert calls["n"] == 1
        assert not (tmp_path / ex.MANIFEST_FILE).exists()

    def test_persistent_failure_writes_manifest(self, tmp_path, monkeypatch):
        real = ex.render_job

        def broken(config, job):
            if job.index == 4:
                raise RuntimeError("boom")
            return real(config, job)

        monkeypatch.setattr(ex, "render_job", broken)
        with pytest.raises(ex.ExperimentFailed) as info:
            ex.run_experiment(small_config(), out_dir=tmp_path)
        manifest = json.loads(info.value.manifest_path.read_text())
        assert list(manifest["failed"]) == ["4"] and "boom" in manifest["failed"]["4"]
        assert 4 not in manifest["completed"] and len(manifest["completed"]) == manifest["total"] - 1

    def test_fits_and_checks(self, tmp_path):
        res = ex.run_experiment(small_config(samples=200, chunk_size=200), out_dir=tmp_path)
        assert {(f.sampler, f.gamma) for f in res.fits} == {("noisy", 0.0), ("noisy", 0.5)}
        checks = report.evaluate_checks(res, (0.0, 1.0), n_sigma=100)
        assert "slope_gamma_independent[0,0.5]" in checks
        assert checks["overlay_consistent[gamma=0]"]["passed"]


class TestEmit:
    def test_empty_result(self, tmp_path):
        files = report.emit(ex.ResultSet(None), ["csv", "json", "svg"], tmp_path)
        assert (tmp_path / "results.csv").read_text() == ",".join(report.RESULT_COLUMNS) + "\n"
        assert len(files) == 2

    def test_json_round_trip(self, tmp_path):
        res = ex.run_experiment(small_config(), out_dir=tmp_path)
        res.checks = report.evaluate_checks(res)
        path = report.write_summary(res, tmp_path / "s.json")
        back = report.read_summary(path)
        assert report.result_to_dict(back) == report.result_to_dict(res)
        assert back.config == res.config

    def test_csv_round_trip(self, tmp_path):
        res = ex.run_experiment(small_config(), out_dir=tmp_path)
        back = report.read_results_csv(report.write_results_csv(res, tmp_path / "r.csv"))
        assert [p.stats for p in back.points] == [p.stats for p in res.points]

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ValueError):
            report.emit(ex.ResultSet(None), ["png"], tmp_path)


class TestPlots:
    def test_svg_is_deterministic(self, tmp_path):
        res = ex.run_experiment(small_config(), out_dir=tmp_path)
        a = plotting.plot_mean_vs_n(res, tmp_path / "a.svg").read_bytes()
        b = plotting.plot_mean_vs_n(res, tmp_path / "b.svg").read_bytes()
        assert a == b and a.lstrip().startswith(b"<?xml")

    def test_overlays_must_tighten(self, tmp_path, monkeypatch):
        plotting.plot_score_overlays(100, [0.025, 0.1, 0.05], tmp_path / "ok.svg")
        monkeypatch.setattr(plotting, "overlay_distances", lambda n, a, z=None: np.array([0.1, 0.2]))
        with pytest.raises(plotting.CurveOrderError):
            plotting.plot_score_overlays(100, [0.1, 0.05], tmp_path / "bad.svg")
        assert not (tmp_path / "bad.svg").exists()

    def test_gap_plot(self, tmp_path):
        assert plotting.plot_gap_vs_n([50, 100], [0.3, 0.75], tmp_path / "g.svg").stat().st_size > 0
