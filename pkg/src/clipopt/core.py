"""Oracle abstraction and reproducible random streams.

Every optimizer in this package consumes a :class:`StochasticOracle`: a
problem exposing the exact objective and gradient (for diagnostics) plus a
sampled stochastic gradient with unbiasedness and a known (or estimated)
variance bound.  Randomness flows through :class:`RngStream`, a counter-based
scheme built on Philox so that concurrent trials are reproducible
independently of execution order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

__all__ = [
    "RngStream",
    "StochasticOracle",
    "TrialAbort",
    "ensure_finite",
]

_MIX_CONST = 0x9E3779B97F4A7C15  # splitmix64 increment
_U64 = (1 << 64) - 1


def _splitmix64(v: int) -> int:
    v = (v + _MIX_CONST) & _U64
    v = ((v ^ (v >> 30)) * 0xBF58476D1CE4E5B9) & _U64
    v = ((v ^ (v >> 27)) * 0x94D049BB133111EB) & _U64
    return (v ^ (v >> 31)) & _U64


class TrialAbort(RuntimeError):
    """A trial produced a non-finite quantity and was stopped.

    Heavy-tailed draws can be astronomically large; rather than letting a
    NaN/Inf silently corrupt an ensemble, optimizers raise this with the
    offending step attached.
    """

    def __init__(self, message: str, step: int, partial=None):
        super().__init__(message)
        self.step = step
        self.partial = partial


@dataclass(frozen=True)
class RngStream:
    """Seedable, splittable random stream.

    Identical ``(seed, stream_id)`` pairs reproduce identical draw sequences
    bit-exactly; distinct stream ids give statistically independent streams
    (distinct Philox keys).  ``child(i)`` derives a new independent stream,
    so an ensemble can key one stream per trial and run trials in any order.
    """

    seed: int
    stream_id: int = 0

    def child(self, index: int) -> "RngStream":
        return RngStream(self.seed, _splitmix64(self.stream_id ^ _splitmix64(index)))

    def generator(self) -> Generator:
        """Fresh generator positioned at the start of this stream."""
        return Generator(Philox(key=[self.seed & _U64, self.stream_id & _U64]))


def ensure_finite(x: np.ndarray, what: str, step: int = -1) -> np.ndarray:
    """Abort the trial if `x` contains NaN/Inf (never admitted into state)."""
    if not np.all(np.isfinite(x)):
        raise TrialAbort(f"non-finite {what} at step {step}", step)
    return x


class StochasticOracle:
    """A problem accessible through exact and sampled first-order information.

    Subclasses fix the problem data and implement :meth:`value`,
    :meth:`full_gradient` and :meth:`_draw_gradients`.  The stochastic
    gradient contract is the usual bounded-variance one: draws are unbiased
    and ``E||g(x) - grad f(x)||^2 <= sigma2``.

    Attributes
    ----------
    dimension : int
    smoothness : float
        Gradient Lipschitz constant L > 0.
    strong_convexity : float
        mu >= 0; zero means merely convex.
    variance_bound : float
        sigma^2 >= 0; exact for synthetic problems, estimated for data.
    optimum : ndarray or None
        Minimizer when known.
    optimal_value : float or None
        f at the minimizer when known.
    """

    dimension: int
    smoothness: float
    strong_convexity: float = 0.0
    variance_bound: float = 0.0
    optimum = None
    optimal_value = None

    # -- exact interface -------------------------------------------------
    def value(self, x: np.ndarray) -> float:
        raise NotImplementedError

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # -- sampled interface -----------------------------------------------
    def _draw_gradients(self, x: np.ndarray, m: int, gen: Generator) -> np.ndarray:
        """Return an (m, n) array of i.i.d. stochastic gradients at x."""
        raise NotImplementedError

    def sample_gradient(self, x: np.ndarray, rng) -> np.ndarray:
        """One unbiased stochastic gradient draw."""
        return self.minibatch_gradient(x, 1, rng)

    def minibatch_gradient(self, x: np.ndarray, m: int, rng) -> np.ndarray:
        """Average of `m` independent draws; variance shrinks like sigma^2/m.

        `rng` may be an :class:`RngStream` (a fresh generator is opened) or an
        already-open ``numpy.random.Generator`` that is consumed in place.
        """
        if m < 1:
            raise ValueError(f"batch size must be >= 1, got {m}")
        x = self._check_x(x)
        gen = rng.generator() if isinstance(rng, RngStream) else rng
        draws = self._draw_gradients(x, int(m), gen)
        g = draws[0] if m == 1 else draws.mean(axis=0)
        return ensure_finite(g, "stochastic gradient")

    def _check_x(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.dimension,):
            raise ValueError(
                f"point has shape {x.shape}, oracle dimension is {self.dimension}"
            )
        if not np.all(np.isfinite(x)):
            raise ValueError("point contains non-finite entries")
        return x

    # -- convenience -----------------------------------------------------
    def suboptimality(self, x: np.ndarray) -> float:
        """f(x) - f*; NaN when the optimal value is unknown."""
        if self.optimal_value is None:
            return float("nan")
        return self.value(x) - self.optimal_value

    def distance_to_optimum(self, x: np.ndarray) -> float:
        if self.optimum is None:
            return float("nan")
        return float(np.linalg.norm(np.asarray(x) - self.optimum))
