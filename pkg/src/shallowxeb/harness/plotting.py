"""Static SVG figures drawn with matplotlib's non-interactive backend."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..distributions import pdf_averaged, probability_gap  # noqa: E402

# fixed salt and no timestamp so identical data gives identical files
plt.rcParams["svg.hashsalt"] = "shallowxeb"
SVG_METADATA = {"Date": None, "Creator": None}


class CurveOrderError(ValueError):
    """Overlay curves do not approach the limit curve monotonically."""


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    return path


def plot_mean_vs_n(result, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for (tag, gamma), pts in result.series().items():
        ns = np.array([p.n for p in pts])
        mean = np.array([p.stats.mean for p in pts])
        se = np.array([p.stats.se_mean for p in pts])
        label = f"{tag} gamma={gamma:g}" if tag == "noisy" else tag
        bars = ax.errorbar(ns, mean, yerr=se, fmt="o", ms=4, capsize=2, label=label)
        try:
            fr = result.fit_for(tag, gamma)
        except KeyError:
            continue
        grid = np.linspace(ns.min(), ns.max(), 50)
        ax.plot(grid, fr.fit.predict(grid), "-", color=bars[0].get_color(), lw=1,
                label=f"fit slope {fr.fit.slope:.4f}")
        if fr.predicted_mean:
            xs = sorted(fr.predicted_mean)
            ax.plot(xs, [fr.predicted_mean[x] for x in xs], ":", color=bars[0].get_color(), lw=1)
    ax.set_xlabel("n")
    ax.set_ylabel("mean of -log q")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_variance_vs_n(result, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for (tag, gamma), pts in result.series().items():
        ns = [p.n for p in pts]
        label = f"{tag} gamma={gamma:g}" if tag == "noisy" else tag
        bars = ax.errorbar(ns, [p.stats.variance for p in pts], yerr=[p.stats.se_variance for p in pts],
                           fmt="s", ms=4, capsize=2, label=label)
        try:
            fr = result.fit_for(tag, gamma)
        except KeyError:
            continue
        if fr.predicted_variance:
            xs = sorted(fr.predicted_variance)
            ax.plot(xs, [fr.predicted_variance[x] for x in xs], ":", color=bars[0].get_color(), lw=1)
    ax.set_xlabel("n")
    ax.set_ylabel("variance of -log q")
    ax.legend(fontsize=7)
    return _save(fig, path)


def overlay_distances(n: int, a_values: Sequence[float], z=None) -> np.ndarray:
    z = np.linspace(0.0, 8.0, 801) if z is None else z
    return np.array([np.max(np.abs(pdf_averaged(z, n, a) - np.exp(-z))) for a in a_values])


def plot_score_overlays(n: int, a_values: Sequence[float], path, z=None) -> Path:
    """Bitstring-averaged ``P_a(z)`` curves with ``e^{-z}``.

    The curves must get monotonically closer to ``e^{-z}`` as ``a`` shrinks;
    this is checked before anything is drawn.
    """
    z = np.linspace(0.0, 8.0, 801) if z is None else np.asarray(z)
    order = sorted(a_values, reverse=True)
    dist = overlay_distances(n, order, z)
    if np.any(np.diff(dist) >= 0):
        raise CurveOrderError(f"sup distances {dist} are not decreasing along a={order}")
    fig, ax = plt.subplots(figsize=(6, 4))
    for a in order:
        ax.semilogy(z, pdf_averaged(z, n, a), lw=1, label=f"a={a:g}")
    ax.semilogy(z, np.exp(-z), "k--", lw=1, label="exp(-z)")
    ax.set_xlabel("z")
    ax.set_ylabel("P_a(z)")
    ax.set_title(f"n={n}")
    ax.legend(fontsize=7)
    return _save(fig, path)


def plot_gap_vs_n(n_values: Sequence[int], c_values: Sequence[float], path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for c in c_values:
        gaps = [probability_gap(n, float(n) ** (-c)).gap for n in n_values]
        ax.semilogx(n_values, gaps, "o-", ms=4, lw=1, label=f"c={c:g}")
    ax.set_xlabel("n")
    ax.set_ylabel("probability gap")
    ax.legend(fontsize=7)
    return _save(fig, path)
