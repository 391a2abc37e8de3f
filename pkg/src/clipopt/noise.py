"""Zero-mean, unit-variance-per-coordinate noise generators.

Three families: Gaussian, Weibull and Burr Type XII.  The latter two are
shifted and scaled so that each coordinate has mean 0 and variance 1, which
makes an n-dimensional draw satisfy ``E[xi] = 0`` and ``E||xi||^2 = n`` while
keeping very different tail behaviour.  Weibull here uses shape ``c = 0.2``
with scale ``1/sqrt(Gamma(11) - Gamma(6)^2) = 1/sqrt(10! - (5!)^2)``; Burr XII
uses ``c = 1, d = 2.3`` normalised through its exact beta-function moments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln, ndtri

from .core import RngStream

__all__ = [
    "NoiseModel",
    "gaussian_noise",
    "weibull_noise",
    "burr_noise",
    "burr_moment",
    "inverse_cdf_sample",
    "sample_noise",
    "sample_noise_matrix",
]

FAMILIES = ("gaussian", "weibull", "burr")


def burr_moment(c: float, d: float, r: int) -> float:
    """r-th raw moment of Burr XII: ``mu_r = d * B((cd - r)/c, (c + r)/c)``.

    Exists only for ``c*d > r``; computed through log-gamma to avoid
    overflow for extreme parameters.
    """
    if c <= 0 or d <= 0:
        raise ValueError(f"Burr parameters must be positive, got c={c}, d={d}")
    if r < 1:
        raise ValueError(f"moment order must be >= 1, got {r}")
    if c * d <= r:
        raise ValueError(
            f"moment of order {r} does not exist for Burr(c={c}, d={d}): need c*d > r"
        )
    return d * math.exp(betaln((c * d - r) / c, (c + r) / c))


def _weibull_log_moment(c: float, r: int) -> float:
    # r-th raw moment of Weibull with unit scale is Gamma(1 + r/c)
    return gammaln(1.0 + r / c)


@dataclass(frozen=True)
class NoiseModel:
    """Coordinate-i.i.d. perturbation generator with E=0, Var=1 per coordinate.

    `scale` and `shift` map the raw family draw to the normalised one:
    ``value = scale * raw + shift``.
    """

    family: str
    dimension: int
    c: float = 0.0
    d: float = 0.0
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown noise family {self.family!r}")
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def variance_total(self) -> float:
        """E||xi||^2 for one draw: the dimension, by the unit-variance contract."""
        return float(self.dimension)


def gaussian_noise(n: int) -> NoiseModel:
    return NoiseModel("gaussian", n)


def weibull_noise(n: int, c: float = 0.2) -> NoiseModel:
    """Weibull noise, default shape c=0.2 (heavy stretched-exponential tail)."""
    if c <= 0:
        raise ValueError(f"Weibull shape must be positive, got {c}")
    m1 = math.exp(_weibull_log_moment(c, 1))
    m2 = math.exp(_weibull_log_moment(c, 2))
    alpha = 1.0 / math.sqrt(m2 - m1 * m1)
    # raw draw already carries the alpha scale; only the mean is removed
    return NoiseModel("weibull", n, c=c, scale=1.0, shift=-alpha * m1)


def burr_noise(n: int, c: float = 1.0, d: float = 2.3) -> NoiseModel:
    """Burr XII noise, default (c=1, d=2.3): polynomial tail, variance exists
    only because c*d = 2.3 > 2."""
    if c <= 0 or d <= 0:
        raise ValueError(f"Burr parameters must be positive, got c={c}, d={d}")
    if c * d <= 2:
        raise ValueError(
            f"Burr(c={c}, d={d}) has no finite variance: need c*d > 2"
        )
    m1 = burr_moment(c, d, 1)
    m2 = burr_moment(c, d, 2)
    std = math.sqrt(m2 - m1 * m1)
    return NoiseModel("burr", n, c=c, d=d, scale=1.0 / std, shift=-m1 / std)


def _weibull_alpha(c: float) -> float:
    m1 = math.exp(_weibull_log_moment(c, 1))
    m2 = math.exp(_weibull_log_moment(c, 2))
    return 1.0 / math.sqrt(m2 - m1 * m1)


def inverse_cdf_sample(model: NoiseModel, u) -> np.ndarray:
    """Invert the family CDF at u in (0,1), before shift/scale.

    Weibull: ``alpha * (-ln(1-u))^(1/c)``;  Burr XII: ``((1-u)^(-1/d) - 1)^(1/c)``;
    Gaussian: standard normal quantile.
    """
    u = np.asarray(u, dtype=np.float64)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    if model.family == "gaussian":
        return ndtri(u)
    if model.family == "weibull":
        alpha = _weibull_alpha(model.c)
        return alpha * np.power(-np.log1p(-u), 1.0 / model.c)
    return np.power(np.power(1.0 - u, -1.0 / model.d) - 1.0, 1.0 / model.c)


def sample_noise_matrix(model: NoiseModel, gen, rows: int) -> np.ndarray:
    """(rows, n) array of independent noise draws; consumes `gen` in place."""
    n = model.dimension
    if model.family == "gaussian":
        return gen.standard_normal((rows, n))
    # inverse-CDF sampling; random() lies in [0, 1), so 1-u is in (0, 1]
    u = gen.random((rows, n))
    if model.family == "weibull":
        alpha = _weibull_alpha(model.c)
        raw = alpha * np.power(-np.log1p(-u), 1.0 / model.c)
    else:
        raw = np.power(np.power(1.0 - u, -1.0 / model.d) - 1.0, 1.0 / model.c)
    return model.scale * raw + model.shift


def sample_noise(model: NoiseModel, rng) -> np.ndarray:
    """One n-dimensional draw from the shifted/scaled family."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    return sample_noise_matrix(model, gen, 1)[0]


def analytic_cdf(model: NoiseModel, x) -> np.ndarray:
    """CDF of the shifted/scaled noise coordinate (test/diagnostic helper)."""
    x = np.asarray(x, dtype=np.float64)
    if model.family == "gaussian":
        from scipy.special import ndtr

        return ndtr(x)
    raw = (x - model.shift) / model.scale
    if model.family == "weibull":
        alpha = _weibull_alpha(model.c)
        z = np.maximum(raw / alpha, 0.0)
        return -np.expm1(-np.power(z, model.c))
    z = np.maximum(raw, 0.0)
    return -np.expm1(-model.d * np.log1p(np.power(z, model.c)))
