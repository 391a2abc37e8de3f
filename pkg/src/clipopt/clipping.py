"""The clip operator and empirical statistics of clipped estimators.

``clip(g, lam) = min{1, lam/||g||} g`` projects a gradient estimate onto the
Euclidean ball of radius lam.  :func:`estimate_clipped_stats` measures, by
Monte Carlo, the four quantities that control how clipping interacts with a
bounded-variance oracle: the magnitude of centred draws (<= 2 lam always),
the bias (<= 4 sigma^2 / (m lam)), and the distortion and variance
(each <= 18 sigma^2 / m), all valid whenever ||grad f(x)|| <= lam/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RngStream, StochasticOracle

__all__ = ["clip", "ClippedEstimatorStats", "estimate_clipped_stats"]


def clip(g: np.ndarray, lam: float) -> np.ndarray:
    """Project g onto the ball of radius lam; the zero vector is its own clip.

    ``lam = inf`` is the no-clipping sentinel and returns g unchanged, which
    makes clipped methods reduce bit-exactly to their unclipped versions.
    """
    if not lam > 0:
        raise ValueError(f"clipping level must be positive, got {lam}")
    g = np.asarray(g, dtype=np.float64)
    norm = float(np.linalg.norm(g))
    if norm <= lam:
        return g
    return g * (lam / norm)


@dataclass
class ClippedEstimatorStats:
    """Monte-Carlo estimates for the clipped mini-batch estimator at a point."""

    magnitude_max: float
    bias_norm: float
    distortion_msq: float
    variance_msq: float
    lam: float
    m: int
    samples_used: int
    # standard errors of the Monte-Carlo estimates, for tolerance checks
    bias_se: float = 0.0
    distortion_se: float = 0.0
    variance_se: float = 0.0


def estimate_clipped_stats(
    oracle: StochasticOracle,
    x: np.ndarray,
    lam: float,
    m: int,
    trials: int,
    rng: RngStream,
) -> ClippedEstimatorStats:
    """Estimate magnitude/bias/distortion/variance of clip(minibatch(x, m), lam).

    Requires ``||grad f(x)|| <= lam/2`` (the regime in which the bias and
    variance bounds hold) and at least 10^3 trials.
    """
    if trials < 1000:
        raise ValueError(f"need at least 1000 trials, got {trials}")
    if m < 1:
        raise ValueError(f"batch size must be >= 1, got {m}")
    if not lam > 0:
        raise ValueError(f"clipping level must be positive, got {lam}")
    grad = oracle.full_gradient(x)
    gnorm = float(np.linalg.norm(grad))
    if gnorm > lam / 2:
        raise ValueError(
            f"||grad f(x)|| = {gnorm:.6g} exceeds lam/2 = {lam / 2:.6g}; "
            "the bias/variance bounds do not apply"
        )

    gen = rng.generator()
    clipped = np.empty((trials, oracle.dimension))
    for t in range(trials):
        clipped[t] = clip(oracle.minibatch_gradient(x, m, gen), lam)

    mean = clipped.mean(axis=0)
    centred = clipped - mean
    dev = clipped - grad

    centred_sq = np.einsum("ij,ij->i", centred, centred)
    dev_sq = np.einsum("ij,ij->i", dev, dev)

    variance_msq = float(centred_sq.mean())
    distortion_msq = float(dev_sq.mean())
    return ClippedEstimatorStats(
        magnitude_max=float(np.sqrt(centred_sq.max())),
        bias_norm=float(np.linalg.norm(mean - grad)),
        distortion_msq=distortion_msq,
        variance_msq=variance_msq,
        lam=float(lam),
        m=int(m),
        samples_used=trials * m,
        bias_se=float(np.sqrt(variance_msq / trials)),
        distortion_se=float(dev_sq.std(ddof=1) / np.sqrt(trials)),
        variance_se=float(centred_sq.std(ddof=1) / np.sqrt(trials)),
    )
