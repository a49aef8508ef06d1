"""Sample statistics and weighted straight-line fits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class SampleStats:
    mean: float
    se_mean: float
    variance: float
    se_variance: float
    m: int


def estimate_stats(values: Sequence[float]) -> SampleStats:
    """Mean, unbiased variance and their standard errors.

    ``se_variance`` uses ``Var(s^2) = (mu4 - (m-3)/(m-1) sigma^4) / m`` with
    the central moments replaced by sample estimates.
    """
    x = np.asarray(values, dtype=float)
    m = x.size
    if m < 2:
        raise ValueError(f"need at least 2 records for a variance, got {m}")
    mean = float(x.mean())
    dev = x - mean
    var = float(dev @ dev / (m - 1))
    mu4 = float(np.mean(dev ** 4))
    var_of_var = (mu4 - (m - 3) / (m - 1) * var * var) / m
    return SampleStats(mean, math.sqrt(var / m), var, math.sqrt(max(var_of_var, 0.0)), m)


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    se_slope: float
    se_intercept: float
    residual_variance: float
    points: int

    def predict(self, x):
        return self.intercept + self.slope * np.asarray(x, dtype=float)

    def to_dict(self) -> dict:
        return asdict(self)


def fit_linear(points: Iterable[tuple[float, float, float]]) -> RegressionFit:
    """Weighted least squares ``y = intercept + slope * x`` from ``(x, y, weight)`` triples.

    Weights are inverse variances, so the reported standard errors are
    absolute.  ``residual_variance`` is the weighted chi-square per degree of
    freedom.
    """
    pts = np.asarray(list(points), dtype=float).reshape(-1, 3)
    x, y, w = pts.T
    if len(np.unique(x)) < 3:
        raise ValueError("need at least 3 distinct abscissae for a fit with error estimates")
    if np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ValueError("weights must be positive and finite")
    s, sx, sxx = w.sum(), w @ x, w @ (x * x)
    sy, sxy = w @ y, w @ (x * y)
    det = s * sxx - sx * sx
    if det <= 1e-12 * s * sxx:
        raise ValueError("rank-deficient design matrix")
    slope = (s * sxy - sx * sy) / det
    intercept = (sxx * sy - sx * sxy) / det
    resid = y - intercept - slope * x
    chi2 = float(w @ (resid * resid))
    return RegressionFit(
        float(slope), float(intercept),
        math.sqrt(s / det), math.sqrt(sxx / det),
        chi2 / (len(x) - 2), len(x),
    )


def inverse_variance_weights(se: Sequence[float]) -> np.ndarray:
    """``1/se^2``; falls back to equal weights if any error bar is zero."""
    se = np.asarray(se, dtype=float)
    if np.any(se <= 0) or np.any(~np.isfinite(se)):
        return np.ones_like(se)
    return 1.0 / se ** 2
