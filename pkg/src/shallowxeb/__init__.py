"""Cross-entropy benchmarking of shallow all-to-all random circuits."""

from .analytics import (
    DepthNoiseParams,
    UnreliableRegimeWarning,
    depth_from_slope,
    linear_xeb,
    logxeb_mean,
    logxeb_var,
    predict_logxeb,
    required_samples,
    summed_moment,
)
from .distributions import probability_gap, score_delta, score_pdf, score_tail, threshold_score
from .hog import classify, heads_threshold, mixed_strategy, robust_strategy, success_probability

__version__ = "0.1.0"
