"""Noise-tail diagnostics and ensemble trajectory statistics.

The histogram tools reproduce the per-sample gradient-norm study used to
judge whether a dataset's stochastic gradients look Gaussian near the
optimum; the sub-Gaussian score is a deliberately blunt heuristic classifier
(not a hypothesis test).  Ensemble statistics turn a bag of seeded
trajectories into quantile curves, the empirical counterpart of
"with probability at least 1 - beta" statements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .optimizers import Trajectory
from .problems import LogisticRegressionProblem

__all__ = [
    "TailHistogram",
    "gradient_norm_histogram",
    "subgaussian_diagnostic",
    "SUBGAUSSIAN_EXP_CAP",
    "LIGHT_TAIL_MAX_RATIO",
    "EnsembleStats",
    "ensemble_quantiles",
    "oscillation_metric",
]

# each exponential summand is truncated at exp(50) to avoid overflow
SUBGAUSSIAN_EXP_CAP = 50.0
# heuristic decision boundary for the capped-mean ratio: draws that ever get
# near the cap blow past this, Gaussian-like samples never reach it
LIGHT_TAIL_MAX_RATIO = 1e12


@dataclass
class TailHistogram:
    """Histogram of per-sample gradient norms with a fitted-normal overlay."""

    edges: np.ndarray
    counts: np.ndarray
    mean: float
    variance: float
    n_samples: int

    def normal_overlay(self, x) -> np.ndarray:
        """Fitted normal density at x, scaled by (sample count * bin width)
        so it overlays the count histogram."""
        x = np.asarray(x, dtype=np.float64)
        if self.variance == 0.0:
            return np.zeros_like(x)
        width = float(np.mean(np.diff(self.edges)))
        z = (x - self.mean) ** 2 / (2.0 * self.variance)
        dens = np.exp(-z) / math.sqrt(2.0 * math.pi * self.variance)
        return dens * self.n_samples * width

    def ks_against_fitted_normal(self) -> float:
        """KS distance between the sample and N(mean, variance); a crude
        light-vs-heavy ordering statistic for comparing datasets."""
        from scipy import stats

        if self.variance == 0.0:
            return 1.0
        return float(
            stats.kstest(
                self._samples, "norm", args=(self.mean, math.sqrt(self.variance))
            ).statistic
        )

    _samples: np.ndarray = field(default=None, repr=False)


def gradient_norm_histogram(
    problem: LogisticRegressionProblem, x, bins: int = 30
) -> TailHistogram:
    """Histogram of {||grad f_i(x)||}_i with fitted-normal overlay parameters.

    Degenerate data (all norms equal) falls back to a single bin.
    """
    if bins < 2:
        raise ValueError("bins must be >= 2")
    norms = problem.component_gradient_norms(x)
    mean = float(norms.mean())
    variance = float(norms.var())
    if variance == 0.0:
        edges = np.asarray([norms[0] - 0.5, norms[0] + 0.5])
        counts = np.asarray([norms.size])
    else:
        counts, edges = np.histogram(norms, bins=bins)
    return TailHistogram(
        edges=edges,
        counts=counts,
        mean=mean,
        variance=variance,
        n_samples=int(norms.size),
        _samples=norms,
    )


def subgaussian_diagnostic(samples) -> float:
    """Tail-heaviness score: capped empirical estimate of
    E[exp(||s - mean||^2 / var)] divided by the sub-Gaussian threshold e.

    Values below :data:`LIGHT_TAIL_MAX_RATIO` are classified light-tailed.
    This is a heuristic classifier; samples whose squared deviations reach
    the exp cap dominate the mean and push the ratio far above the boundary.
    """
    s = np.asarray(samples, dtype=np.float64).ravel()
    if s.size < 100:
        raise ValueError(f"need at least 100 samples, got {s.size}")
    var = float(s.var())
    if var == 0.0:
        raise ValueError("samples have zero empirical variance")
    w = (s - s.mean()) ** 2 / var
    score = float(np.exp(np.minimum(w, SUBGAUSSIAN_EXP_CAP)).mean())
    return score / math.e


def is_light_tailed(samples) -> bool:
    return subgaussian_diagnostic(samples) < LIGHT_TAIL_MAX_RATIO


@dataclass
class EnsembleStats:
    """Per-checkpoint quantiles of f_gap across an ensemble of trajectories."""

    ks: np.ndarray
    calls: np.ndarray
    levels: tuple
    quantiles: np.ndarray  # shape (len(levels), len(ks))
    n_trials: int

    def curve(self, level: float) -> np.ndarray:
        return self.quantiles[self.levels.index(level)]


def ensemble_quantiles(trajectories, levels=(0.5, 0.9)) -> EnsembleStats:
    """Empirical f_gap quantiles per checkpoint (linear interpolation between
    order statistics).  All trajectories must share the checkpoint grid."""
    trajs = list(trajectories)
    if not trajs:
        raise ValueError("empty ensemble")
    grid = trajs[0].checkpoint_grid()
    for t in trajs[1:]:
        if t.checkpoint_grid() != grid:
            raise ValueError("trajectories do not share a checkpoint grid")
    levels = tuple(float(q) for q in levels)
    gaps = np.vstack([t.f_gap_array() for t in trajs])
    quantiles = np.quantile(gaps, levels, axis=0, method="linear")
    calls = np.asarray(trajs[0].calls, dtype=np.int64)
    return EnsembleStats(
        ks=np.asarray(grid, dtype=np.int64),
        calls=calls,
        levels=levels,
        quantiles=np.atleast_2d(quantiles),
        n_trials=len(trajs),
    )


def oscillation_metric(trajectory: Trajectory, tail_fraction: float = 0.25) -> float:
    """Max over the trailing window of f_gap divided by its median there.

    A flat tail scores 1; spikes score by their relative height.  The metric
    is invariant to rescaling all f_gaps.
    """
    if not 0.0 < tail_fraction <= 1.0:
        raise ValueError(f"tail_fraction must be in (0, 1], got {tail_fraction}")
    gaps = trajectory.f_gap_array()
    if gaps.size == 0:
        raise ValueError("empty trajectory")
    start = gaps.size - max(1, int(math.ceil(tail_fraction * gaps.size)))
    window = gaps[start:]
    peak = float(window.max())
    med = float(np.median(window))
    if peak == 0.0:
        return 1.0
    if med == 0.0:
        return math.inf
    return peak / med
