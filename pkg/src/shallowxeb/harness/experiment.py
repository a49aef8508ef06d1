"""Job-parallel, resumable sample generation and aggregation."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from ..analytics import EULER_GAMMA, LOG2, DepthNoiseParams, UnreliableRegimeWarning, depth_from_slope, logxeb_mean, logxeb_var
from ..circuits.xgamma import SAMPLE_COLUMNS
from ..samplers import SamplerSpec, sample
from .config import ExperimentConfig
from .seeding import job_generator
from .stats import RegressionFit, SampleStats, estimate_stats, fit_linear, inverse_variance_weights

log = logging.getLogger(__name__)

JOBS_DIR = "jobs"
SAMPLES_FILE = "samples.csv"
MANIFEST_FILE = "manifest.json"


class ExperimentFailed(RuntimeError):
    def __init__(self, message, manifest_path):
        super().__init__(message)
        self.manifest_path = manifest_path


@dataclass(frozen=True)
class Job:
    index: int
    point: int
    n: int
    gamma: float
    spec: SamplerSpec
    count: int


def plan_jobs(config: ExperimentConfig) -> list[Job]:
    jobs = []
    for p, (n, gamma, spec) in enumerate(config.grid()):
        left = config.samples
        while left > 0:
            count = min(config.chunk_size, left)
            jobs.append(Job(len(jobs), p, n, gamma, spec, count))
            left -= count
    return jobs


def render_job(config: ExperimentConfig, job: Job) -> str:
    """CSV text (no header) for one job's samples."""
    rng = job_generator(config.seed, job.index)
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    for _ in range(job.count):
        out.writerow(sample(job.spec, job.n, config.depth, config.topology, rng).row())
    return buf.getvalue()


def _job_path(root: Path, index: int) -> Path:
    return root / JOBS_DIR / f"job-{index:06d}.csv"


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", newline="") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _execute(args) -> int:
    config, job, root = args
    _write_atomic(_job_path(Path(root), job.index), render_job(config, job))
    return job.index


def _run_with_retry(args):
    """Returns ``(index, None)`` on success or ``(index, error text)`` after the retry fails too."""
    job = args[1]
    for attempt in (1, 2):
        try:
            return _execute(args), None
        except Exception as exc:  # noqa: BLE001 - recorded in the manifest
            log.warning("job %d attempt %d failed: %s", job.index, attempt, exc)
            err = f"{type(exc).__name__}: {exc}"
    return job.index, err


@dataclass(frozen=True)
class PointResult:
    n: int
    gamma: float
    sampler: str
    stats: SampleStats
    mean_z: float

    def row(self) -> list[str]:
        s = self.stats
        return [
            str(self.n), repr(self.gamma), self.sampler,
            repr(s.mean), repr(s.se_mean), repr(s.variance), repr(s.se_variance), str(s.m),
        ]


@dataclass(frozen=True)
class FitResult:
    sampler: str
    gamma: float
    fit: RegressionFit
    a_hat: Optional[float]
    s_hat: Optional[float]
    predicted_mean: dict = field(default_factory=dict)
    predicted_variance: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "sampler": self.sampler,
            "gamma": self.gamma,
            **self.fit.to_dict(),
            "a_hat": self.a_hat,
            "s_hat": self.s_hat,
            "predicted_mean": {str(k): v for k, v in self.predicted_mean.items()},
            "predicted_variance": {str(k): v for k, v in self.predicted_variance.items()},
        }


@dataclass
class ResultSet:
    config: Optional[ExperimentConfig]
    points: list[PointResult] = field(default_factory=list)
    fits: list[FitResult] = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    def point(self, n: int, gamma: float, sampler: str) -> PointResult:
        for p in self.points:
            if p.n == n and p.gamma == gamma and p.sampler == sampler:
                return p
        raise KeyError((n, gamma, sampler))

    def series(self) -> dict[tuple[str, float], list[PointResult]]:
        out: dict = {}
        for p in self.points:
            out.setdefault((p.sampler, p.gamma), []).append(p)
        return out

    def fit_for(self, sampler: str, gamma: float) -> FitResult:
        for f in self.fits:
            if f.sampler == sampler and f.gamma == gamma:
                return f
        raise KeyError((sampler, gamma))


def parse_sample_rows(text: str) -> list[list[str]]:
    return [row for row in csv.reader(io.StringIO(text)) if row]


def _overlay(fit: RegressionFit, ns: list[int]):
    """Analytic mean and variance at the depth parameter implied by the fitted slope."""
    if not 0.0 < fit.slope <= LOG2:
        return None, None, {}, {}
    a_hat = depth_from_slope(fit.slope)
    # intercept = gamma_e - s in the closed form
    s_hat = min(1.0, max(0.0, EULER_GAMMA - fit.intercept))
    mean, var = {}, {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnreliableRegimeWarning)
        for n in ns:
            params = DepthNoiseParams(n, a_hat, s_hat)
            mean[n] = logxeb_mean(params)
            var[n] = logxeb_var(params)
    return a_hat, s_hat, mean, var


def aggregate(config: ExperimentConfig, jobs: list[Job], texts: list[str]) -> ResultSet:
    grid = config.grid()
    by_point: list[list[list[str]]] = [[] for _ in grid]
    for job, text in zip(jobs, texts):
        by_point[job.point].extend(parse_sample_rows(text))
    result = ResultSet(config)
    for (n, gamma, spec), rows in zip(grid, by_point):
        nlq = [float(r[7]) for r in rows]
        z = [float(r[8]) for r in rows]
        if len(nlq) >= 2:
            stats = estimate_stats(nlq)
        else:
            stats = SampleStats(nlq[0] if nlq else math.nan, math.nan, math.nan, math.nan, len(nlq))
        result.points.append(PointResult(n, gamma, spec.tag, stats, float(np.mean(z)) if z else math.nan))
    if config.fit_slope:
        attach_fits(result, overlay=config.overlay)
    return result


def attach_fits(result: ResultSet, overlay: bool = True) -> ResultSet:
    """Fit mean vs n for every (sampler, gamma) series with at least 3 distinct n."""
    result.fits = []
    for (tag, gamma), pts in result.series().items():
        if len({p.n for p in pts}) < 3 or any(p.stats.m < 2 for p in pts):
            continue
        w = inverse_variance_weights([p.stats.se_mean for p in pts])
        fit = fit_linear([(p.n, p.stats.mean, wi) for p, wi in zip(pts, w)])
        a_hat, s_hat, mean, var = (None, None, {}, {})
        if overlay:
            a_hat, s_hat, mean, var = _overlay(fit, [p.n for p in pts])
        result.fits.append(FitResult(tag, gamma, fit, a_hat, s_hat, mean, var))
    return result


def run_experiment(
    config: ExperimentConfig,
    jobs: int = 1,
    resume: bool = False,
    out_dir: Optional[os.PathLike] = None,
) -> ResultSet:
    """Generate every grid point's samples, write them under ``out_dir`` and aggregate.

    Each job's rows go to their own file, written atomically; with
    ``resume`` existing job files are kept, so an interrupted run picks up
    where it stopped.  A failing job is retried once; if the retry fails the
    run stops and ``manifest.json`` lists what completed.
    """
    root = Path(out_dir if out_dir is not None else config.output_dir)
    (root / JOBS_DIR).mkdir(parents=True, exist_ok=True)
    stamp = root / JOBS_DIR / "config.json"
    cfg_text = json.dumps(config.to_dict() | {"output_dir": None}, sort_keys=True)
    if resume and stamp.exists() and stamp.read_text() != cfg_text:
        raise ValueError(f"{root} holds jobs from a different configuration; cannot resume")
    stamp.write_text(cfg_text)

    plan = plan_jobs(config)
    todo = [j for j in plan if not (resume and _job_path(root, j.index).exists())]
    log.info("%d jobs planned, %d to run", len(plan), len(todo))
    args = [(config, j, str(root)) for j in todo]
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_with_retry, args, chunksize=1))
    else:
        outcomes = [_run_with_retry(a) for a in args]

    failed = {i: err for i, err in outcomes if err is not None}
    if failed:
        manifest = root / MANIFEST_FILE
        done = [j.index for j in plan if _job_path(root, j.index).exists()]
        manifest.write_text(json.dumps({"completed": done, "failed": failed, "total": len(plan)}, indent=2))
        raise ExperimentFailed(f"{len(failed)} job(s) failed after retry; see {manifest}", manifest)

    (root / MANIFEST_FILE).unlink(missing_ok=True)
    texts = [_job_path(root, j.index).read_text() for j in plan]
    header = ",".join(SAMPLE_COLUMNS) + "\n"
    _write_atomic(root / SAMPLES_FILE, header + "".join(texts))
    return aggregate(config, plan, texts)


def load_samples(path) -> list[dict]:
    """Rows of a sample CSV as dicts with numeric fields converted."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["n"] = int(r["n"])
        r["depth"] = int(r["depth"])
        for key in ("gamma", "q", "neg_log_q", "z"):
            r[key] = float(r[key])
    return rows
