"""Closed-form Brownian-ensemble predictions for shallow all-to-all circuits.

Everything is expressed in the depth parameter ``a = exp(-12 beta J)`` and the
noise signal ``s = exp(-n beta gamma)``.  Quantities that scale like ``2**-n``
are computed in natural-log space so that ``n`` in the thousands is fine.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import bisect
from scipy.special import gammaln, logsumexp

EULER_GAMMA = 0.57721566490153286061
PI_SQUARED_OVER_6 = math.pi ** 2 / 6.0
LOG2 = math.log(2.0)

#: Largest depth parameter for which the large-depth expansion is trusted.
MAX_RELIABLE_A = 0.25


class UnreliableRegimeWarning(UserWarning):
    """Raised (as a warning) when ``a`` exceeds :data:`MAX_RELIABLE_A`."""


@dataclass(frozen=True)
class DepthNoiseParams:
    """System size, depth parameter and noise signal.

    ``c`` and ``r`` are only set when the parameters were built with
    :meth:`from_scaling` (``a = n**-c``, ``signal = a**r``).
    """

    n: int
    a: float
    signal: float = 1.0
    c: Optional[float] = None
    r: Optional[float] = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not 0.0 <= self.a < 1.0:
            raise ValueError(f"depth parameter a must lie in [0, 1), got {self.a!r}")
        if not 0.0 <= self.signal <= 1.0:
            raise ValueError(f"signal must lie in [0, 1], got {self.signal!r}")

    @classmethod
    def from_scaling(cls, n: int, c: float, r: float = 1.0) -> "DepthNoiseParams":
        if c <= 0:
            raise ValueError("depth exponent c must be positive")
        if r < 0:
            raise ValueError("noise exponent r must be non-negative")
        a = float(n) ** (-c)
        return cls(n=n, a=a, signal=a ** r, c=c, r=r)

    def with_signal(self, signal: float) -> "DepthNoiseParams":
        return DepthNoiseParams(self.n, self.a, signal)

    @property
    def valid(self) -> bool:
        return self.a <= MAX_RELIABLE_A

    @property
    def log_dim(self) -> float:
        return self.n * LOG2


def _warn_if_unreliable(params: DepthNoiseParams) -> None:
    if not params.valid:
        warnings.warn(
            f"a={params.a:.4g} > {MAX_RELIABLE_A}: Brownian closed forms are not trusted here",
            UnreliableRegimeWarning,
            stacklevel=3,
        )


def entropy_nats(p: float) -> float:
    """Binary entropy in nats, with ``0 log 0 = 0``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log(p) - (1.0 - p) * math.log1p(-p)


def logit(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise ValueError(f"logit needs 0 < p < 1, got {p!r}")
    return math.log(p) - math.log1p(-p)


def log_weight_factor(n, x, a):
    """``log b_x`` where ``1/b_x = (1-a)**x (1+a)**(n-x)``.  Vectorised in ``x``."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > n):
        raise ValueError("Hamming weight must satisfy 0 <= x <= n")
    out = -(x * math.log1p(-a) + (n - x) * math.log1p(a))
    return float(out) if out.ndim == 0 else out


def weight_factor(n, x, a):
    return np.exp(log_weight_factor(n, x, a))


def log_binomials(n: int) -> np.ndarray:
    """``log C(n, x)`` for ``x = 0..n``."""
    x = np.arange(n + 1)
    return gammaln(n + 1) - gammaln(x + 1) - gammaln(n - x + 1)


def log_probability_moment(n: int, x, a: float, k: int):
    """``log m^(k)_{a,x} = log k! - k (log d + log b_x)``."""
    if k < 1 or int(k) != k:
        raise ValueError("moment order k must be a positive integer")
    return gammaln(k + 1) - k * (n * LOG2 + log_weight_factor(n, x, a))


def probability_moment(n: int, x, a: float, k: int):
    return np.exp(log_probability_moment(n, x, a, k))


def log_summed_moment(params: DepthNoiseParams, k: int) -> float:
    """Log of the sampler-weighted moment ``<q^k>`` including noise.

    ``(k!/2^{n(k+1)}) [(1-a)^{k+1} + (1+a)^{k+1}]^n (1 + k s)``.
    """
    if k < 1 or int(k) != k:
        raise ValueError("moment order k must be a positive integer")
    n, a, s = params.n, params.a, params.signal
    _warn_if_unreliable(params)
    bracket = np.logaddexp((k + 1) * math.log1p(-a), (k + 1) * math.log1p(a))
    return float(
        gammaln(k + 1) - n * (k + 1) * LOG2 + n * bracket + math.log1p(k * s)
    )


def summed_moment(params: DepthNoiseParams, k: int) -> float:
    return math.exp(log_summed_moment(params, k))


def hamming_sum_log_moment(params: DepthNoiseParams, k: int) -> float:
    """Same quantity as :func:`log_summed_moment`, summed weight by weight.

    Kept as an explicit log-sum-exp over Hamming weights; used to check the
    binomial closed form.
    """
    n, a, s = params.n, params.a, params.signal
    x = np.arange(n + 1)
    terms = log_binomials(n) + gammaln(k + 1) - (k + 1) * (n * LOG2 + log_weight_factor(n, x, a))
    return float(logsumexp(terms) + math.log1p(k * s))


def logxeb_mean(params: DepthNoiseParams) -> float:
    """Ensemble mean of ``-log q``: ``n H((1+a)/2) + gamma_e - s``."""
    _warn_if_unreliable(params)
    return params.n * entropy_nats((1.0 + params.a) / 2.0) + EULER_GAMMA - params.signal


def logxeb_var(params: DepthNoiseParams) -> float:
    """Ensemble variance of ``-log q``."""
    _warn_if_unreliable(params)
    a = params.a
    depth_term = 0.0 if a == 0.0 else params.n * (1.0 - a * a) / 4.0 * logit((1.0 + a) / 2.0) ** 2
    return PI_SQUARED_OVER_6 - params.signal ** 2 + depth_term


def standard_error(variance: float, m: int) -> float:
    if m < 1:
        raise ValueError("need at least one sample")
    if variance < 0:
        raise ValueError("variance must be non-negative")
    return math.sqrt(variance / m)


@dataclass(frozen=True)
class XebPrediction:
    mean: float
    variance: float
    snr: float
    required_samples: int
    asymptotic_samples: Optional[float] = None
    reliable: bool = True


def required_samples(params: DepthNoiseParams) -> int:
    """Smallest ``m`` with ``sigma / sqrt(m) <= signal``."""
    if params.signal <= 0.0:
        raise ValueError("signal is zero: no number of samples resolves it")
    ratio = logxeb_var(params) / params.signal ** 2
    # guard against ceil(1.0000000000000002)
    return max(1, math.ceil(ratio - 1e-12))


def asymptotic_required_samples(n: int, c: float, r: float) -> float:
    """Leading-order sample count: ``n^{1+2c(r-1)}`` below ``c = 1/2``, ``(pi^2/6) n^{2cr}`` above."""
    if c < 0.5:
        return float(n) ** (1.0 + 2.0 * c * (r - 1.0))
    return PI_SQUARED_OVER_6 * float(n) ** (2.0 * c * r)


def predict_logxeb(params: DepthNoiseParams) -> XebPrediction:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UnreliableRegimeWarning)
        mean = logxeb_mean(params)
        var = logxeb_var(params)
        m = required_samples(params) if params.signal > 0 else math.inf
    snr = params.signal / math.sqrt(var)
    asym = None
    if params.c is not None and params.r is not None:
        asym = asymptotic_required_samples(params.n, params.c, params.r)
    return XebPrediction(mean, var, snr, m, asym, params.valid)


@dataclass(frozen=True)
class LinearXeb:
    """Linear XEB mean and second moment, stored as logs."""

    log_mean: float
    log_second_moment: float
    moment_ratio: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "moment_ratio", math.exp(self.log_second_moment - 2.0 * self.log_mean)
        )

    @property
    def mean(self) -> float:
        return math.exp(self.log_mean)

    @property
    def second_moment(self) -> float:
        return math.exp(self.log_second_moment)

    @property
    def snr(self) -> float:
        excess = self.moment_ratio - 1.0
        return math.inf if excess <= 0 else 1.0 / math.sqrt(excess)


def linear_xeb(params: DepthNoiseParams) -> LinearXeb:
    n, a, s = params.n, params.a, params.signal
    _warn_if_unreliable(params)
    log_mean = -n * LOG2 + n * math.log1p(a * a) + math.log1p(s)
    log_q2 = LOG2 - 2 * n * LOG2 + n * math.log1p(3 * a * a) + math.log1p(2 * s)
    return LinearXeb(log_mean, log_q2)


def depth_from_slope(slope: float, xtol: float = 1e-12) -> float:
    """Invert ``slope = H((1+a)/2)`` for ``a`` in ``[0, 1)``."""
    if not 0.0 < slope <= LOG2:
        raise ValueError(f"slope must lie in (0, log 2], got {slope!r}")
    if slope == LOG2:
        return 0.0

    def f(a):
        return entropy_nats((1.0 + a) / 2.0) - slope

    # H((1+a)/2) is strictly decreasing in a, f(0) > 0 and f(1) = -slope < 0
    return bisect(f, 0.0, 1.0, xtol=xtol, maxiter=200)
