"""Concrete oracles: the noisy quadratic toy problem and finite-sum logistic
regression with LIBSVM-format ingestion.

The toy problem is ``f(x) = ||x||^2 / 2`` with stochastic gradient ``x + xi``
where xi comes from a :class:`~clipopt.noise.NoiseModel`; it has L = mu = 1,
x* = 0 and sigma^2 = n exactly.  Logistic regression is
``f(x) = (1/r) sum_i log(1 + exp(-y_i <a_i, x>))`` with the uniform-index
sampler and ``L = lambda_max(A^T A) / (4r)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .core import RngStream, StochasticOracle
from .noise import NoiseModel, sample_noise_matrix

__all__ = [
    "QuadraticToyProblem",
    "LogisticRegressionProblem",
    "SparseDataset",
    "make_toy",
    "make_logreg",
    "parse_libsvm",
    "serialize_libsvm",
    "load_libsvm",
    "solve_reference",
    "ReferenceSolution",
    "load_cached_optimum",
    "save_cached_optimum",
]


class QuadraticToyProblem(StochasticOracle):
    """``f(x) = ||x||^2/2`` with additive noise on the gradient: g = x + xi.

    `noise=None` gives the deterministic problem (sigma = 0).
    """

    def __init__(self, noise: NoiseModel | None):
        if noise is None:
            raise ValueError("use make_toy(n) for the deterministic problem")
        self.noise = noise
        self.dimension = noise.dimension
        self.smoothness = 1.0
        self.strong_convexity = 1.0
        self.variance_bound = noise.variance_total
        self.optimum = np.zeros(self.dimension)
        self.optimal_value = 0.0

    def value(self, x):
        x = self._check_x(x)
        return 0.5 * float(x @ x)

    def full_gradient(self, x):
        return self._check_x(x).copy()

    def _draw_gradients(self, x, m, gen):
        return x + sample_noise_matrix(self.noise, gen, m)


class _DeterministicToy(QuadraticToyProblem):
    """sigma = 0 variant: every stochastic draw equals the exact gradient."""

    def __init__(self, n: int):
        self.noise = None
        self.dimension = n
        self.smoothness = 1.0
        self.strong_convexity = 1.0
        self.variance_bound = 0.0
        self.optimum = np.zeros(n)
        self.optimal_value = 0.0

    def _draw_gradients(self, x, m, gen):
        return np.tile(x, (m, 1))


def make_toy(n: int, noise: NoiseModel | None = None) -> QuadraticToyProblem:
    """Toy oracle of dimension n with L = mu = 1, x* = 0 and sigma^2 = n."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if noise is None:
        return _DeterministicToy(n)
    if noise.dimension != n:
        raise ValueError(
            f"noise dimension {noise.dimension} does not match problem dimension {n}"
        )
    return QuadraticToyProblem(noise)


# ----------------------------------------------------------------------
# LIBSVM-format datasets
# ----------------------------------------------------------------------

@dataclass
class SparseDataset:
    """Rows of (index, value) pairs with +-1 labels.

    Indices are 1-based in files and 0-based in memory, strictly increasing
    within a row.
    """

    rows: list = field(repr=False)
    labels: np.ndarray = field(repr=False)
    dimension: int = 0

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def to_csr(self) -> sp.csr_matrix:
        indptr = [0]
        indices = []
        data = []
        for row in self.rows:
            for idx, val in row:
                indices.append(idx)
                data.append(val)
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.asarray(data, dtype=np.float64), indices, indptr),
            shape=(self.n_rows, self.dimension),
        )


def _map_labels(raw: list[float]) -> np.ndarray:
    values = sorted(set(raw))
    if set(values) <= {-1.0, 1.0}:
        return np.asarray(raw, dtype=np.float64)
    if set(values) <= {0.0, 1.0}:
        return np.asarray([1.0 if v == 1.0 else -1.0 for v in raw])
    # two-class files with other encodings (e.g. 1/2) map low -> -1, high -> +1
    if len(values) == 2:
        lo, hi = values
        return np.asarray([1.0 if v == hi else -1.0 for v in raw])
    raise ValueError(f"cannot map label set {values} to binary -1/+1")


def parse_libsvm(text, dimension: int | None = None) -> SparseDataset:
    """Parse LIBSVM text ("<label> <idx>:<val> ..." per line).

    Labels are mapped to {-1,+1}: files already in that convention pass
    through, {0,1} files map 0 to -1.  Malformed tokens, non-increasing
    indices and empty input are rejected.
    """
    if hasattr(text, "read"):
        text = text.read()
    rows = []
    raw_labels = []
    max_index = 0
    for lineno, line in enumerate(str(text).splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            label = float(parts[0])
        except ValueError as exc:
            raise ValueError(f"line {lineno}: bad label {parts[0]!r}") from exc
        row = []
        prev = 0
        for token in parts[1:]:
            try:
                idx_s, val_s = token.split(":", 1)
                idx = int(idx_s)
                val = float(val_s)
            except ValueError as exc:
                raise ValueError(f"line {lineno}: bad feature token {token!r}") from exc
            if idx < 1:
                raise ValueError(f"line {lineno}: indices are 1-based, got {idx}")
            if idx <= prev:
                raise ValueError(
                    f"line {lineno}: feature indices must be strictly increasing"
                )
            prev = idx
            row.append((idx - 1, val))
            max_index = max(max_index, idx)
        rows.append(row)
        raw_labels.append(label)
    if not rows:
        raise ValueError("empty dataset")
    dim = max_index if dimension is None else int(dimension)
    if dim < max_index:
        raise ValueError(f"declared dimension {dim} below max feature index {max_index}")
    return SparseDataset(rows=rows, labels=_map_labels(raw_labels), dimension=dim)


def serialize_libsvm(data: SparseDataset) -> str:
    """Inverse of :func:`parse_libsvm` (round-trips exactly via repr floats)."""
    lines = []
    for label, row in zip(data.labels, data.rows):
        feats = " ".join(f"{idx + 1}:{float(val)!r}" for idx, val in row)
        lines.append(f"{int(label):d} {feats}".rstrip())
    return "\n".join(lines) + "\n"


def load_libsvm(path) -> SparseDataset:
    return parse_libsvm(Path(path).read_text())


# ----------------------------------------------------------------------
# Logistic regression
# ----------------------------------------------------------------------

def _power_iteration_lmax(A: sp.csr_matrix, tol: float = 1e-6, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of A^T A by power iteration (fixed seed)."""
    gen = np.random.default_rng(1234)
    v = gen.standard_normal(A.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = A.T @ (A @ v)
        lam_new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-30):
            return lam_new
        lam = lam_new
    return lam


class LogisticRegressionProblem(StochasticOracle):
    """Finite-sum logistic loss; the stochastic gradient is grad f_i at a
    uniformly random index."""

    def __init__(self, A: sp.csr_matrix, y: np.ndarray):
        if A.shape[0] != len(y):
            raise ValueError("label count does not match row count")
        if A.shape[0] == 0:
            raise ValueError("empty dataset")
        self.A = sp.csr_matrix(A, dtype=np.float64)
        self.y = np.asarray(y, dtype=np.float64)
        self.n_samples, self.dimension = self.A.shape
        self.lambda_max = _power_iteration_lmax(self.A)
        self.smoothness = self.lambda_max / (4.0 * self.n_samples)
        self.strong_convexity = 0.0
        self.variance_bound = 0.0  # filled by estimate_variance_bound
        self._A_dense = None
        if self.n_samples * self.dimension <= 2_000_000:
            self._A_dense = np.asarray(self.A.todense())

    # margins z_i = y_i <a_i, x>
    def _margins(self, x):
        return self.y * (self.A @ x)

    def value(self, x):
        x = self._check_x(x)
        z = self._margins(x)
        # log(1 + exp(-z)) computed stably
        return float(np.mean(np.logaddexp(0.0, -z)))

    def full_gradient(self, x):
        x = self._check_x(x)
        coeff = -self.y * expit(-self._margins(x))
        return np.asarray(self.A.T @ coeff) / self.n_samples

    def component_gradient(self, i: int, x) -> np.ndarray:
        """grad f_i(x) = -y_i a_i / (1 + exp(y_i <a_i, x>))."""
        x = self._check_x(x)
        a = self.A.getrow(i).toarray().ravel()
        z = self.y[i] * float(a @ x)
        return (-self.y[i] * expit(-z)) * a

    def component_value(self, i: int, x) -> float:
        x = self._check_x(x)
        a = self.A.getrow(i).toarray().ravel()
        return float(np.logaddexp(0.0, -self.y[i] * float(a @ x)))

    def component_gradient_norms(self, x) -> np.ndarray:
        """||grad f_i(x)|| for every i (vectorised; used by diagnostics)."""
        x = self._check_x(x)
        coeff = np.abs(self.y * expit(-self._margins(x)))
        row_norms = np.sqrt(np.asarray(self.A.multiply(self.A).sum(axis=1)).ravel())
        return coeff * row_norms

    def _draw_gradients(self, x, m, gen):
        idx = gen.integers(0, self.n_samples, size=m)
        rows = (
            self._A_dense[idx] if self._A_dense is not None else self.A[idx].toarray()
        )
        coeff = -self.y[idx] * expit(-self.y[idx] * (rows @ x))
        return coeff[:, None] * rows

    def estimate_variance_bound(self, probes: int = 10, scale: float = 1.0) -> float:
        """sigma^2 as the max over probe points of (1/r) sum_i ||grad f_i - grad f||^2.

        Probe set: the origin plus `probes` fixed-seed Gaussian perturbations.
        """
        gen = np.random.default_rng(20210604)
        points = [np.zeros(self.dimension)]
        points += [scale * gen.standard_normal(self.dimension) for _ in range(probes)]
        row_sq = np.asarray(self.A.multiply(self.A).sum(axis=1)).ravel()
        worst = 0.0
        for x in points:
            coeff = -self.y * expit(-self._margins(x))
            sq_norms = coeff**2 * row_sq
            g = np.asarray(self.A.T @ coeff) / self.n_samples
            # E||g_i - grad f||^2 = E||g_i||^2 - ||grad f||^2
            worst = max(worst, float(sq_norms.mean()) - float(g @ g))
        self.variance_bound = worst
        return worst


def make_logreg(data: SparseDataset) -> LogisticRegressionProblem:
    if data.n_rows < 1:
        raise ValueError("empty dataset")
    return LogisticRegressionProblem(data.to_csr(), data.labels)


# ----------------------------------------------------------------------
# Deterministic reference solve (for f*)
# ----------------------------------------------------------------------

@dataclass
class ReferenceSolution:
    x: np.ndarray
    f_star: float
    grad_norm: float
    tol: float
    converged: bool
    iterations: int
    stop_reason: str


def solve_reference(
    problem: StochasticOracle, tol: float = 1e-8, max_iter: int = 200_000
) -> ReferenceSolution:
    """High-accuracy deterministic solve: Nesterov accelerated descent with
    function-value restarts, stopped on ``||grad f|| <= tol``.

    Separable logistic data has no finite minimiser; in that case the
    iteration cap fires and the result is flagged as an upper-bound estimate
    rather than a certified optimum.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    L = problem.smoothness
    if not L > 0:
        raise ValueError("need a positive smoothness constant")
    x = np.zeros(problem.dimension)
    v = x.copy()
    t = 1.0
    fx = problem.value(x)
    step = 1.0 / L
    iterations = 0
    reason = "iteration cap"
    converged = False
    for iterations in range(1, max_iter + 1):
        g = problem.full_gradient(v)
        x_new = v - step * g
        f_new = problem.value(x_new)
        if f_new > fx:  # function restart: drop momentum
            v = x
            t = 1.0
            g = problem.full_gradient(v)
            x_new = v - step * g
            f_new = problem.value(x_new)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        v = x_new + ((t - 1.0) / t_new) * (x_new - x)
        x, fx, t = x_new, f_new, t_new
        if iterations % 10 == 0 or iterations == 1:
            gn = float(np.linalg.norm(problem.full_gradient(x)))
            if gn <= tol:
                reason = "gradient norm"
                converged = True
                break
    grad_norm = float(np.linalg.norm(problem.full_gradient(x)))
    if grad_norm <= tol:
        converged = True
        reason = "gradient norm"
    return ReferenceSolution(
        x=x,
        f_star=float(problem.value(x)),
        grad_norm=grad_norm,
        tol=tol,
        converged=converged,
        iterations=iterations,
        stop_reason=reason,
    )


def cached_optimum_path(dataset_path) -> Path:
    return Path(str(dataset_path) + ".optimum.json")


def save_cached_optimum(dataset_path, sol: ReferenceSolution) -> Path:
    path = cached_optimum_path(dataset_path)
    payload = {
        "x": [float(v) for v in sol.x],
        "f_star": sol.f_star,
        "grad_norm": sol.grad_norm,
        "tol": sol.tol,
        "converged": sol.converged,
        "stop_reason": sol.stop_reason,
    }
    path.write_text(json.dumps(payload, indent=1))
    return path


def load_cached_optimum(dataset_path) -> ReferenceSolution | None:
    path = cached_optimum_path(dataset_path)
    if not path.exists():
        return None
    payload = json.loads(path.read_text())
    return ReferenceSolution(
        x=np.asarray(payload["x"], dtype=np.float64),
        f_star=float(payload["f_star"]),
        grad_norm=float(payload["grad_norm"]),
        tol=float(payload["tol"]),
        converged=bool(payload.get("converged", True)),
        iterations=-1,
        stop_reason=str(payload.get("stop_reason", "cached")),
    )
