"""Matplotlib rendering of convergence curves and tail histograms to SVG.

Figures are written next to the delimited output with a deterministic layout:
fixed figure geometry, a fixed svg hash salt and no embedded creation date,
so reruns of the same experiment produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import EnsembleStats, TailHistogram

__all__ = ["plot_convergence", "plot_histogram", "plot_trajectories"]

plt.rcParams["svg.hashsalt"] = "clipopt"
plt.rcParams["figure.figsize"] = (6.0, 4.0)

_SAVE_KW = dict(format="svg", metadata={"Date": None})


def _finish(fig, ax, path, title, xlabel):
    ax.set_xlabel(xlabel)
    ax.set_ylabel("f(x) - f*")
    ax.set_yscale("log")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def plot_convergence(
    stats: EnsembleStats, path, x_axis: str = "iterations", title: str = ""
) -> None:
    """Quantile curves of the suboptimality, log-scale y.

    The lowest and highest requested quantile levels bound a shaded band;
    every level is also drawn as a line.
    """
    xs = stats.ks if x_axis == "iterations" else stats.calls
    fig, ax = plt.subplots()
    positive = np.maximum(stats.quantiles, 1e-300)
    if len(stats.levels) >= 2:
        ax.fill_between(xs, positive[0], positive[-1], alpha=0.2, color="C0",
                        label=f"q{stats.levels[0]:g}..q{stats.levels[-1]:g}")
    for i, level in enumerate(stats.levels):
        ax.plot(xs, positive[i], label=f"quantile {level:g}")
    _finish(fig, ax, path, title,
            "iteration" if x_axis == "iterations" else "oracle calls")


def plot_trajectories(trajectories, path, x_axis: str = "iterations",
                      title: str = "", labels=None) -> None:
    """Raw f_gap curves of a few runs (log-scale y)."""
    fig, ax = plt.subplots()
    for i, traj in enumerate(trajectories):
        xs = traj.ks if x_axis == "iterations" else traj.calls
        label = labels[i] if labels else f"trial {i}"
        ax.plot(xs, np.maximum(traj.f_gap_array(), 1e-300), lw=0.9, label=label)
    _finish(fig, ax, path, title,
            "iteration" if x_axis == "iterations" else "oracle calls")


def plot_histogram(hist: TailHistogram, path, title: str = "") -> None:
    """Count histogram of gradient norms with the fitted-normal overlay in red."""
    fig, ax = plt.subplots()
    widths = np.diff(hist.edges)
    ax.bar(hist.edges[:-1], hist.counts, width=widths, align="edge",
           alpha=0.6, color="C0", label="samples")
    grid = np.linspace(hist.edges[0], hist.edges[-1], 256)
    ax.plot(grid, hist.normal_overlay(grid), color="red", lw=1.5,
            label="fitted normal")
    ax.set_xlabel("per-sample gradient norm")
    ax.set_ylabel("count")
    if title:
        ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
