"""Outer restart loops executing a :class:`~clipopt.schedules.RestartPlan`.

Each stage runs the inner method for N0 iterations from the previous stage's
output; under strong convexity the plan's parameters force the suboptimality
to halve per stage with the plan's confidence.  Stages never share random
streams (stream keyed by restart index).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import RngStream, StochasticOracle, TrialAbort
from .optimizers import Trajectory, run_sgd, run_sstm
from .schedules import RestartPlan

__all__ = ["RestartRun", "run_restarted_sstm", "run_restarted_sgd"]


@dataclass
class RestartRun:
    """Result of a restarted run: the final point, the per-stage inner
    trajectories, and a per-stage summary suitable for JSON."""

    x_hat: np.ndarray
    trajectories: list = field(default_factory=list)
    summary: list = field(default_factory=list)
    total_calls: int = 0
    completed_stages: int = 0
    aborted: bool = False

    def summary_dict(self) -> dict:
        return {
            "stages": self.summary,
            "total_calls": self.total_calls,
            "completed_stages": self.completed_stages,
            "aborted": self.aborted,
        }

    def combined_trajectory(self) -> Trajectory:
        """Stage trajectories stitched onto a global iteration/call axis
        (stage t's step k becomes global step t*N0 + k)."""
        combined = Trajectory(meta={"method": "restarted", "stages": len(self.trajectories)})
        offset_k = 0
        offset_calls = 0
        for t, traj in enumerate(self.trajectories):
            for i in range(len(traj)):
                if t > 0 and i == 0:
                    continue  # stage start duplicates the previous stage's end
                combined.append(
                    offset_k + traj.ks[i],
                    traj.f_gap[i],
                    traj.dist[i],
                    offset_calls + traj.calls[i],
                    traj.lam[i],
                    traj.clipped[i],
                    traj.m[i],
                )
            if len(traj):
                offset_k += traj.ks[-1]
                offset_calls += traj.calls[-1]
        combined.aborted_at = -1 if not self.aborted else offset_k
        return combined


def _run_restarts(
    oracle: StochasticOracle,
    plan: RestartPlan,
    x0: np.ndarray,
    rng: RngStream,
    record_every: int,
    runner,
) -> RestartRun:
    x_hat = np.asarray(x0, dtype=np.float64).copy()
    result = RestartRun(x_hat=x_hat)
    for t in range(plan.tau):
        schedule = plan.stage_schedule(t)
        stage_rng = rng.child(t)
        try:
            x_hat, traj = runner(
                oracle, schedule, plan.N0, stage_rng, x0=result.x_hat,
                record_every=record_every,
            )
        except TrialAbort as abort:
            result.aborted = True
            if abort.partial is not None:
                result.trajectories.append(abort.partial)
            return result
        result.x_hat = x_hat
        result.trajectories.append(traj)
        result.total_calls += traj.meta.get("oracle_calls", 0)
        result.completed_stages = t + 1
        entry = {
            "t": t,
            "f_gap": oracle.suboptimality(x_hat),
            "calls": result.total_calls,
        }
        if plan.method == "sstm":
            entry["B_t"] = plan.B_t(t)
        else:
            entry["lam_t"] = plan.lam_t(t)
            entry["m_t"] = plan.m_t(t)
        result.summary.append(entry)
    return result


def run_restarted_sstm(
    oracle: StochasticOracle,
    plan: RestartPlan,
    x0: np.ndarray,
    rng: RngStream,
    record_every: int = 0,
) -> RestartRun:
    """Execute an accelerated restart plan from x0.

    A tau = 0 plan (target already met) returns x0 untouched.  An inner
    abort ends the outer loop with the partial results flagged.
    """
    if plan.method != "sstm":
        raise ValueError(f"plan is for {plan.method!r}, not the accelerated method")
    if oracle.strong_convexity <= 0:
        raise ValueError("restarted runs require a strongly convex oracle")
    return _run_restarts(oracle, plan, x0, rng, record_every, run_sstm)


def run_restarted_sgd(
    oracle: StochasticOracle,
    plan: RestartPlan,
    x0: np.ndarray,
    rng: RngStream,
    record_every: int = 0,
) -> RestartRun:
    """Execute an SGD restart plan from x0; each stage's output is the inner
    run's averaged iterate."""
    if plan.method != "sgd":
        raise ValueError(f"plan is for {plan.method!r}, not SGD")
    if oracle.strong_convexity <= 0:
        raise ValueError("restarted runs require a strongly convex oracle")
    return _run_restarts(oracle, plan, x0, rng, record_every, run_sgd)
