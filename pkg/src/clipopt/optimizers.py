"""Iteration loops: clipped SGD (constant, decaying and heuristic clipping
levels) and the clipped accelerated similar-triangles method.

Both loops treat ``lambda = inf`` (or ``B = inf``) as the no-clipping
sentinel, so the unclipped methods are the same code path and reduce
bit-exactly under identical random streams.  Any non-finite iterate aborts
the trial with the offending step attached instead of propagating NaNs into
an ensemble.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .clipping import clip
from .core import RngStream, StochasticOracle, TrialAbort, ensure_finite
from .schedules import SgdSchedule, SstmSchedule

__all__ = [
    "StepReport",
    "Trajectory",
    "SstmState",
    "SgdState",
    "sstm_step",
    "clipped_sgd_step",
    "run_sstm",
    "run_sgd",
]

CSV_HEADER = ("k", "f_gap", "dist", "calls", "lambda", "clipped", "m")


@dataclass
class StepReport:
    """Per-step record; f_gap and dist are NaN unless the optimum is known."""

    k: int
    f_gap: float
    dist: float
    grad_norm_estimate: float
    m: int
    lam: float
    clipped: bool
    calls: int
    wall: float = 0.0


@dataclass
class Trajectory:
    """Checkpoint records of one run plus its provenance.

    The checkpoint grid is the initial state (k = 0) followed by every
    `record_every`-th step and the final step.
    """

    ks: list = field(default_factory=list)
    f_gap: list = field(default_factory=list)
    dist: list = field(default_factory=list)
    calls: list = field(default_factory=list)
    lam: list = field(default_factory=list)
    clipped: list = field(default_factory=list)
    m: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    aborted_at: int = -1

    def append(self, k, f_gap, dist, calls, lam, clipped, m):
        self.ks.append(int(k))
        self.f_gap.append(float(f_gap))
        self.dist.append(float(dist))
        self.calls.append(int(calls))
        self.lam.append(float(lam))
        self.clipped.append(bool(clipped))
        self.m.append(int(m))

    def __len__(self):
        return len(self.ks)

    @property
    def final_f_gap(self) -> float:
        return self.f_gap[-1]

    def f_gap_array(self) -> np.ndarray:
        return np.asarray(self.f_gap, dtype=np.float64)

    def checkpoint_grid(self) -> tuple:
        return tuple(self.ks)

    def to_csv(self, path) -> None:
        """Write the spec'd schema: k, f_gap, dist, calls, lambda, clipped, m."""
        lines = [",".join(CSV_HEADER)]
        for i in range(len(self.ks)):
            lines.append(
                f"{self.ks[i]},{self.f_gap[i]!r},{self.dist[i]!r},{self.calls[i]},"
                f"{self.lam[i]!r},{int(self.clipped[i])},{self.m[i]}"
            )
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def _should_record(k: int, N: int, record_every: int) -> bool:
    return k == N or (record_every > 0 and k % record_every == 0)


# ----------------------------------------------------------------------
# Accelerated method
# ----------------------------------------------------------------------

@dataclass
class SstmState:
    """Coupled sequences of the accelerated method; y0 = z0 = x0, A0 = 0."""

    y: np.ndarray
    z: np.ndarray
    A: float = 0.0
    k: int = 0
    calls: int = 0
    clip_activations: int = 0

    @classmethod
    def start(cls, x0: np.ndarray) -> "SstmState":
        x0 = np.asarray(x0, dtype=np.float64)
        return cls(y=x0.copy(), z=x0.copy())


def sstm_step(
    state: SstmState,
    oracle: StochasticOracle,
    schedule: SstmSchedule,
    gen,
) -> tuple[SstmState, StepReport]:
    """One accelerated step.

    x^{k+1} = (A_k y^k + alpha_{k+1} z^k) / A_{k+1};
    g = clip(minibatch(x^{k+1}, m_k), B / alpha_{k+1});
    z^{k+1} = z^k - alpha_{k+1} g;
    y^{k+1} = (A_k y^k + alpha_{k+1} z^{k+1}) / A_{k+1}.
    """
    k = state.k
    alpha, A_next = schedule.alpha(k)
    x = (state.A * state.y + alpha * state.z) / A_next
    ensure_finite(x, "iterate x", k)

    m = schedule.batch_at(k)
    g_raw = oracle.minibatch_gradient(x, m, gen)
    lam = schedule.lam_at(k)
    norm = float(np.linalg.norm(g_raw))
    clipped_flag = norm > lam
    g = clip(g_raw, lam)

    z_next = state.z - alpha * g
    y_next = (state.A * state.y + alpha * z_next) / A_next
    ensure_finite(z_next, "iterate z", k)
    ensure_finite(y_next, "iterate y", k)

    state = SstmState(
        y=y_next,
        z=z_next,
        A=state.A + alpha,  # recurrence form; equals the closed form exactly
        k=k + 1,
        calls=state.calls + m,
        clip_activations=state.clip_activations + int(clipped_flag),
    )
    report = StepReport(
        k=k + 1,
        f_gap=float("nan"),
        dist=float("nan"),
        grad_norm_estimate=norm,
        m=m,
        lam=lam,
        clipped=clipped_flag,
        calls=state.calls,
    )
    return state, report


def run_sstm(
    oracle: StochasticOracle,
    schedule: SstmSchedule,
    N: int,
    rng,
    x0: np.ndarray | None = None,
    record_every: int = 1,
) -> tuple[np.ndarray, Trajectory]:
    """Run N accelerated steps from x0 and return (y^N, trajectory).

    The recorded solution object is y^k (the iterate the convergence
    guarantee speaks about).  A trial hitting non-finite state raises
    :class:`TrialAbort` carrying the partial trajectory.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x0 = np.zeros(oracle.dimension) if x0 is None else np.asarray(x0, dtype=np.float64)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    state = SstmState.start(x0)
    traj = Trajectory(meta={"method": "sstm", "schedule": schedule.to_dict(), "N": N})
    t_start = time.perf_counter()
    traj.append(0, oracle.suboptimality(x0), oracle.distance_to_optimum(x0),
                0, schedule.lam_at(0), False, 0)
    try:
        for k in range(N):
            state, report = sstm_step(state, oracle, schedule, gen)
            if _should_record(k + 1, N, record_every):
                traj.append(
                    k + 1,
                    oracle.suboptimality(state.y),
                    oracle.distance_to_optimum(state.y),
                    state.calls,
                    report.lam,
                    report.clipped,
                    report.m,
                )
    except TrialAbort as abort:
        traj.aborted_at = abort.step
        abort.partial = traj
        raise
    traj.meta["wall_seconds"] = time.perf_counter() - t_start
    traj.meta["clip_activations"] = state.clip_activations
    traj.meta["oracle_calls"] = state.calls
    return state.y, traj


# ----------------------------------------------------------------------
# SGD family
# ----------------------------------------------------------------------

@dataclass
class SgdState:
    """Iterate plus a compensated running sum of past iterates.

    The average maintained here is of x^0 ... x^{N-1} (the iterates *before*
    each step), matching the guarantee for the averaged output.  Kahan
    compensation keeps the incremental average equal to the batch average to
    ~1e-12 relative even at 10^6 steps.
    """

    x: np.ndarray
    avg_sum: np.ndarray
    avg_comp: np.ndarray
    k: int = 0
    calls: int = 0
    clip_activations: int = 0

    @classmethod
    def start(cls, x0: np.ndarray) -> "SgdState":
        x0 = np.asarray(x0, dtype=np.float64)
        return cls(x=x0.copy(), avg_sum=np.zeros_like(x0), avg_comp=np.zeros_like(x0))

    def _accumulate(self, v: np.ndarray) -> None:
        y = v - self.avg_comp
        t = self.avg_sum + y
        self.avg_comp = (t - self.avg_sum) - y
        self.avg_sum = t

    def average(self) -> np.ndarray:
        if self.k == 0:
            return self.x.copy()
        return self.avg_sum / self.k


def clipped_sgd_step(
    state: SgdState,
    oracle: StochasticOracle,
    schedule: SgdSchedule,
    gen,
) -> tuple[SgdState, StepReport]:
    """x^{k+1} = x^k - gamma clip(minibatch(x^k, m_k), lambda_k)."""
    k = state.k
    m = schedule.batch_at(k)
    lam = schedule.lam_at(k)
    g_raw = oracle.minibatch_gradient(state.x, m, gen)
    norm = float(np.linalg.norm(g_raw))
    clipped_flag = norm > lam
    g = clip(g_raw, lam)

    state._accumulate(state.x)
    x_next = state.x - schedule.gamma * g
    ensure_finite(x_next, "iterate x", k)

    new_state = SgdState(
        x=x_next,
        avg_sum=state.avg_sum,
        avg_comp=state.avg_comp,
        k=k + 1,
        calls=state.calls + m,
        clip_activations=state.clip_activations + int(clipped_flag),
    )
    report = StepReport(
        k=k + 1,
        f_gap=float("nan"),
        dist=float("nan"),
        grad_norm_estimate=norm,
        m=m,
        lam=lam,
        clipped=clipped_flag,
        calls=new_state.calls,
    )
    return new_state, report


def run_sgd(
    oracle: StochasticOracle,
    schedule: SgdSchedule,
    N: int,
    rng,
    x0: np.ndarray | None = None,
    record_every: int = 1,
) -> tuple[np.ndarray, Trajectory]:
    """Run N SGD steps from x0.

    Returns the schedule's guaranteed output: the running average of
    x^0..x^{N-1} for the convex-theorem variant, the last iterate otherwise.
    Trajectory f_gap/dist always track the current iterate x^k.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    x0 = np.zeros(oracle.dimension) if x0 is None else np.asarray(x0, dtype=np.float64)
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    state = SgdState.start(x0)
    traj = Trajectory(meta={"method": "sgd", "schedule": schedule.to_dict(), "N": N})
    t_start = time.perf_counter()
    traj.append(0, oracle.suboptimality(x0), oracle.distance_to_optimum(x0),
                0, schedule.lam_at(0), False, 0)
    try:
        for k in range(N):
            state, report = clipped_sgd_step(state, oracle, schedule, gen)
            if _should_record(k + 1, N, record_every):
                traj.append(
                    k + 1,
                    oracle.suboptimality(state.x),
                    oracle.distance_to_optimum(state.x),
                    state.calls,
                    report.lam,
                    report.clipped,
                    report.m,
                )
    except TrialAbort as abort:
        traj.aborted_at = abort.step
        abort.partial = traj
        raise
    traj.meta["wall_seconds"] = time.perf_counter() - t_start
    traj.meta["clip_activations"] = state.clip_activations
    traj.meta["oracle_calls"] = state.calls
    solution = state.average() if schedule.output == "average" else state.x
    if schedule.output == "average":
        traj.meta["average_f_gap"] = oracle.suboptimality(solution)
    return solution, traj
