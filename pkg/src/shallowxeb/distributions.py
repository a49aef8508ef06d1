"""Finite-depth output distributions and the heavy-output score density.

All densities are written in the rescaled score ``z = d q``.  A sum over
Hamming weights ``x`` with weights ``C(n, x) / d`` replaces the sum over
bitstrings; every such sum goes through a (signed) log-sum-exp because the
individual terms span hundreds of decades once ``n`` is ~100.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .analytics import LOG2, DepthNoiseParams, log_binomials, log_weight_factor

GRID_POINTS = 400
GRID_MIN = 1e-4


class ThresholdNotFound(RuntimeError):
    """No sign change of the clean-minus-spoofer density on the scan grid."""

    def __init__(self, message, grid, values):
        super().__init__(message)
        self.grid = grid
        self.values = values


@dataclass(frozen=True)
class WeightTable:
    """Per-Hamming-weight coefficients ``log(C(n,x)/d)`` and ``b_x``."""

    n: int
    a: float

    @cached_property
    def log_coeff(self) -> np.ndarray:
        return log_binomials(self.n) - self.n * LOG2

    @cached_property
    def log_b(self) -> np.ndarray:
        return log_weight_factor(self.n, np.arange(self.n + 1), self.a)

    @cached_property
    def b(self) -> np.ndarray:
        return np.exp(self.log_b)

    @cached_property
    def mass(self) -> np.ndarray:
        """Probability that a density draw comes from weight ``x`` (sums to one)."""
        w = np.exp(self.log_coeff - self.log_b)
        return w / w.sum()


def _weights(n: int, a: float) -> WeightTable:
    return WeightTable(int(n), float(a))


def _as_grid(z) -> tuple[np.ndarray, bool]:
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    return np.atleast_1d(z), scalar


def _signed_sum(log_mag: np.ndarray, sign: np.ndarray) -> np.ndarray:
    """Row-wise ``sum(sign * exp(log_mag))`` without overflow."""
    log_abs, s = logsumexp(log_mag, b=sign, axis=-1, return_sign=True)
    return s * np.exp(log_abs)


def pdf_fixed_weight(q, n: int, x: int, a: float):
    """Density of ``q`` for one bitstring of Hamming weight ``x``: ``d b e^{-d b q}``."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("probabilities must be non-negative")
    log_db = n * LOG2 + log_weight_factor(n, x, a)
    return np.exp(log_db - np.exp(log_db) * q)


def pdf_averaged(z, n: int, a: float):
    """Bitstring-averaged density of ``z``: ``(1/d) sum_x C(n,x) b_x e^{-b_x z}``."""
    zz, scalar = _as_grid(z)
    if np.any(zz < 0):
        raise ValueError("scores must be non-negative")
    w = _weights(n, a)
    terms = w.log_coeff + w.log_b - np.outer(zz, w.b)
    out = np.exp(logsumexp(terms, axis=-1))
    return float(out[0]) if scalar else out


def score_pdf(z, params: DepthNoiseParams):
    """Score density ``S(z)`` for a sampler with signal ``s``.

    ``(1/d) sum_x C(n,x) [1 + s (b_x z - 1)] e^{-b_x z}``.
    """
    zz, scalar = _as_grid(z)
    if np.any(zz < 0):
        raise ValueError("scores must be non-negative")
    w = _weights(params.n, params.a)
    bz = np.outer(zz, w.b)
    bracket = 1.0 + params.signal * (bz - 1.0)
    with np.errstate(divide="ignore"):
        log_mag = w.log_coeff - bz + np.log(np.abs(bracket))
    out = _signed_sum(log_mag, np.sign(bracket))
    return float(out[0]) if scalar else out


def score_delta(z, n: int, a: float):
    """Clean-minus-spoofer density difference ``(1/d) sum_x C(n,x)(b_x z - 1) e^{-b_x z}``."""
    zz, scalar = _as_grid(z)
    w = _weights(n, a)
    bz = np.outer(zz, w.b)
    t = bz - 1.0
    with np.errstate(divide="ignore"):
        log_mag = w.log_coeff - bz + np.log(np.abs(t))
    out = _signed_sum(log_mag, np.sign(t))
    return float(out[0]) if scalar else out


def _delta_sign(z: np.ndarray, w: WeightTable) -> np.ndarray:
    bz = np.outer(z, w.b)
    t = bz - 1.0
    with np.errstate(divide="ignore"):
        log_mag = w.log_coeff - bz + np.log(np.abs(t))
    _, s = logsumexp(log_mag, b=np.sign(t), axis=-1, return_sign=True)
    return s


def score_tail(z0, params: DepthNoiseParams):
    """``P(z > z0)``, integrated weight by weight in closed form.

    Each term contributes ``e^{-b z0} (1/b + s z0)``.
    """
    zz, scalar = _as_grid(z0)
    if np.any(zz < 0):
        raise ValueError("threshold must be non-negative")
    w = _weights(params.n, params.a)
    bz = np.outer(zz, w.b)
    first = w.log_coeff - w.log_b - bz
    out = np.exp(logsumexp(first, axis=-1))
    if params.signal > 0:
        with np.errstate(divide="ignore"):
            second = w.log_coeff - bz + np.log(params.signal * zz)[:, None]
        out = out + np.exp(logsumexp(second, axis=-1))
    return float(out[0]) if scalar else out


def _gap_at(z0: float, w: WeightTable) -> float:
    """``int_{z0}^inf Delta(z) dz = (1/d) sum_x C(n,x) z0 e^{-b_x z0}``."""
    return float(z0 * np.exp(logsumexp(w.log_coeff - w.b * z0)))


def scan_grid(n: int) -> np.ndarray:
    return np.geomspace(GRID_MIN, 10.0 * max(n, 1), GRID_POINTS)


def delta_roots(n: int, a: float, rtol: float = 1e-10) -> list[float]:
    """All sign changes of ``Delta`` on the scan grid, each refined by bracketing."""
    w = _weights(n, a)
    grid = scan_grid(n)
    signs = _delta_sign(grid, w)
    roots = []
    for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        lo, hi = grid[i], grid[i + 1]
        roots.append(brentq(lambda z: score_delta(z, n, a), lo, hi, rtol=rtol, xtol=1e-300, maxiter=500))
    if not roots:
        raise ThresholdNotFound(
            f"Delta(z) has no sign change on [{grid[0]:g}, {grid[-1]:g}] for n={n}, a={a}",
            grid,
            score_delta(grid, n, a),
        )
    return roots


@dataclass(frozen=True)
class ClassifierBoundary:
    z_star: float
    gap: float
    p_clean: float
    p_spoof: float
    roots: tuple = field(default=())

    @property
    def multiple_roots(self) -> bool:
        return len(self.roots) > 1


def _select_root(roots: Sequence[float], w: WeightTable) -> float:
    # the tail gap is stationary at every root; keep the one separating most mass
    return max(roots, key=lambda r: _gap_at(r, w))


def threshold_score(n: int, a: float) -> float:
    """Decision boundary ``z*``: the root of ``Delta(z)`` carrying the largest gap."""
    if a == 0.0:
        return 1.0
    return _select_root(delta_roots(n, a), _weights(n, a))


def probability_gap(n: int, a: float) -> ClassifierBoundary:
    w = _weights(n, a)
    roots = (1.0,) if a == 0.0 else tuple(delta_roots(n, a))
    z_star = _select_root(roots, w)
    base = DepthNoiseParams(n, a, 1.0)
    p_clean = score_tail(z_star, base)
    p_spoof = score_tail(z_star, base.with_signal(0.0))
    return ClassifierBoundary(z_star, _gap_at(z_star, w), p_clean, p_spoof, roots)


@dataclass
class ScoreDistribution:
    """Score density for fixed parameters, with cached weight tables."""

    params: DepthNoiseParams
    grid: Optional[np.ndarray] = None

    def __post_init__(self):
        self._w = _weights(self.params.n, self.params.a)
        if self.grid is None:
            self.grid = scan_grid(self.params.n)

    def pdf(self, z=None):
        return score_pdf(self.grid if z is None else z, self.params)

    def tail(self, z0):
        return score_tail(z0, self.params)

    def sample(self, size: int, rng: np.random.Generator) -> np.ndarray:
        return sample_scores(self.params, size, rng)


def sample_scores(params: DepthNoiseParams, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw scores from ``S(z)``.

    Each Hamming weight carries total mass ``C(n,x)/(d b_x)``; within a weight
    the density is the mixture ``(1-s) Exp(b) + s Gamma(2, 1/b)``.
    """
    w = _weights(params.n, params.a)
    x = rng.choice(params.n + 1, size=size, p=w.mass)
    shape = np.where(rng.random(size) < params.signal, 2.0, 1.0)
    return rng.gamma(shape, 1.0 / w.b[x])


def write_score_table(path, n: int, a: float, z=None) -> None:
    """CSV with columns ``z, S_clean, S_spoof, delta``."""
    z = scan_grid(n) if z is None else np.asarray(z, dtype=float)
    clean = score_pdf(z, DepthNoiseParams(n, a, 1.0))
    spoof = score_pdf(z, DepthNoiseParams(n, a, 0.0))
    delta = score_delta(z, n, a)
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["z", "S_clean", "S_spoof", "delta"])
        for row in zip(z, clean, spoof, delta):
            out.writerow([repr(float(v)) for v in row])


def sup_distance_to_porter_thomas(n: int, a: float, z=None) -> float:
    z = np.linspace(0.0, 20.0, 2001) if z is None else z
    return float(np.max(np.abs(pdf_averaged(z, n, a) - np.exp(-z))))


def log_mean_score(params: DepthNoiseParams) -> float:
    """Log of the first moment of ``S``: ``n log(1+a^2) + log(1+s)``."""
    return params.n * math.log1p(params.a ** 2) + math.log1p(params.signal)
