"""Result tables, JSON summaries, acceptance checks and figure emission."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from pathlib import Path
from typing import Iterable, Optional

from ..analytics import entropy_nats
from .config import ExperimentConfig
from .experiment import FitResult, PointResult, ResultSet
from .stats import RegressionFit, SampleStats

RESULT_COLUMNS = ("n", "gamma", "sampler", "mean", "se_mean", "variance", "se_variance", "m")
FORMATS = ("csv", "json", "svg")

DEFAULT_SLOPE_RANGE = (0.67, 0.70)


def write_results_csv(result: ResultSet, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(RESULT_COLUMNS)
        for p in result.points:
            out.writerow(p.row())
    return path


def read_results_csv(path) -> ResultSet:
    result = ResultSet(None)
    with open(path, newline="") as fh:
        for r in csv.DictReader(fh):
            stats = SampleStats(
                float(r["mean"]), float(r["se_mean"]), float(r["variance"]),
                float(r["se_variance"]), int(r["m"]),
            )
            result.points.append(PointResult(int(r["n"]), float(r["gamma"]), r["sampler"], stats, math.nan))
    return result


def evaluate_checks(
    result: ResultSet,
    slope_range: tuple[float, float] = DEFAULT_SLOPE_RANGE,
    n_sigma: float = 2.0,
) -> dict:
    """Slope window, slope agreement across gamma, and intercept ordering for noisy fits."""
    checks = {}
    noisy = sorted((f for f in result.fits if f.sampler == "noisy"), key=lambda f: f.gamma)
    for f in noisy:
        lo, hi = slope_range
        checks[f"slope_in_range[gamma={f.gamma:g}]"] = {
            "passed": bool(lo <= f.fit.slope <= hi),
            "value": f.fit.slope, "range": [lo, hi],
        }
        if f.a_hat is not None:
            resid = abs(f.fit.slope - entropy_nats((1 + f.a_hat) / 2))
            checks[f"overlay_consistent[gamma={f.gamma:g}]"] = {"passed": bool(resid < 1e-9), "value": resid}
    for f1, f2 in itertools.combinations(noisy, 2):
        diff = abs(f1.fit.slope - f2.fit.slope)
        sigma = math.hypot(f1.fit.se_slope, f2.fit.se_slope)
        checks[f"slope_gamma_independent[{f1.gamma:g},{f2.gamma:g}]"] = {
            "passed": bool(diff <= n_sigma * sigma), "value": diff, "sigma": sigma, "n_sigma": n_sigma,
        }
    if len(noisy) >= 2:
        intercepts = [f.fit.intercept for f in noisy]
        checks["intercepts_increasing_in_gamma"] = {
            "passed": all(b > a for a, b in zip(intercepts, intercepts[1:])),
            "value": intercepts,
        }
    return checks


def all_passed(checks: dict) -> bool:
    return all(c["passed"] for c in checks.values())


def result_to_dict(result: ResultSet) -> dict:
    return {
        "config": result.config.to_dict() if result.config else None,
        "points": [
            {"n": p.n, "gamma": p.gamma, "sampler": p.sampler, "mean_z": p.mean_z, **vars(p.stats)}
            for p in result.points
        ],
        "fits": [f.to_dict() for f in result.fits],
        "checks": result.checks,
        "passed": all_passed(result.checks),
    }


def result_from_dict(data: dict) -> ResultSet:
    config = ExperimentConfig.from_dict(data["config"]) if data.get("config") else None
    result = ResultSet(config, checks=data.get("checks", {}))
    for p in data["points"]:
        stats = SampleStats(p["mean"], p["se_mean"], p["variance"], p["se_variance"], p["m"])
        result.points.append(PointResult(p["n"], p["gamma"], p["sampler"], stats, p["mean_z"]))
    fit_keys = RegressionFit.__dataclass_fields__
    for f in data["fits"]:
        fit = RegressionFit(**{k: f[k] for k in fit_keys})
        result.fits.append(FitResult(
            f["sampler"], f["gamma"], fit, f["a_hat"], f["s_hat"],
            {int(k): v for k, v in f["predicted_mean"].items()},
            {int(k): v for k, v in f["predicted_variance"].items()},
        ))
    return result


def write_summary(result: ResultSet, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(result_to_dict(result), indent=2) + "\n")
    return path


def read_summary(path) -> ResultSet:
    return result_from_dict(json.loads(Path(path).read_text()))


def emit(result: ResultSet, formats: Iterable[str], out_dir, stem: str = "results") -> list[Path]:
    """Write the requested formats under ``out_dir``; returns the files written."""
    formats = list(formats)
    bad = set(formats) - set(FORMATS)
    if bad:
        raise ValueError(f"unknown formats {sorted(bad)}; choose from {FORMATS}")
    out = Path(out_dir)
    written = []
    if "csv" in formats:
        written.append(write_results_csv(result, out / f"{stem}.csv"))
    if "json" in formats:
        written.append(write_summary(result, out / f"{stem}.json"))
    if "svg" in formats and result.points:
        from . import plotting

        written.append(plotting.plot_mean_vs_n(result, out / f"{stem}-mean.svg"))
        written.append(plotting.plot_variance_vs_n(result, out / f"{stem}-variance.svg"))
    return written


def format_table(rows: list[dict], columns: Optional[list[str]] = None) -> str:
    """Plain CSV text of a list of dicts (used by the analytic subcommand)."""
    columns = columns or (list(rows[0]) if rows else [])
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n")
    out.writerow(columns)
    for r in rows:
        out.writerow([repr(v) if isinstance(v, float) else v for v in (r[c] for c in columns)])
    return buf.getvalue()
