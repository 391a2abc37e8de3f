"""Configuration-driven experiment runner.

An :class:`ExperimentConfig` declares a problem, a method, schedule policy or
overrides, an ensemble size and a base seed; :func:`run_experiment` executes
the trials (in parallel when asked), writes one CSV per trial plus quantile
curves, SVG convergence figures and a provenance JSON that contains every
number needed to re-derive the schedule.  Identical configs produce
bit-identical per-trial CSVs regardless of worker count or execution order.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import RngStream, TrialAbort
from .diagnostics import (
    LIGHT_TAIL_MAX_RATIO,
    ensemble_quantiles,
    gradient_norm_histogram,
    subgaussian_diagnostic,
)
from .noise import burr_noise, gaussian_noise, weibull_noise
from .optimizers import run_sgd, run_sstm
from .problems import (
    load_cached_optimum,
    load_libsvm,
    make_logreg,
    make_toy,
    save_cached_optimum,
    solve_reference,
)
from .restarts import run_restarted_sgd, run_restarted_sstm
from .schedules import (
    d_clipped_sgd_schedule,
    epoch_boundary_period,
    restart_plan_sgd,
    restart_plan_sstm,
    sgd_manual,
    sgd_strongly_convex_params,
    sgd_theorem_params,
    sstm_batch_policy,
    sstm_manual,
)

__all__ = ["ExperimentConfig", "ExperimentResult", "run_experiment", "run_diagnostic"]

METHODS = (
    "sgd",
    "clipped-sgd",
    "d-clipped-sgd",
    "sc-clipped-sgd",
    "sstm",
    "clipped-sstm",
    "r-clipped-sstm",
    "r-clipped-sgd",
)

NOISE_FAMILIES = {
    "gaussian": gaussian_noise,
    "weibull": weibull_noise,
    "burr": burr_noise,
}

_SGD_OVERRIDES = {"gamma", "lam", "m", "lam0", "l_epochs", "alpha_dec", "epoch_len"}
_SSTM_OVERRIDES = {"a", "B", "m", "policy", "a0"}
_COMMON_OVERRIDES = {"practical_scale"}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the field."""


@dataclass
class ExperimentConfig:
    """Declarative description of one experiment.

    problem: {"kind": "toy", "n": ..., "noise": "gaussian|weibull|burr|none",
              "x0_norm": ...} or {"kind": "logreg", "path": ..., "radius": ...}.
    schedule: method-specific overrides (gamma, lam, m, a, B, lam0, l_epochs,
              alpha_dec, policy, a0, practical_scale); theorem parameters are
              used where no override is given.
    """

    problem: dict
    method: str
    trials: int = 1
    seed: int = 0
    N: int | None = None
    epsilon: float | None = None
    beta: float = 0.05
    record_every: int = 1
    outdir: str = ""
    workers: int = 1
    schedule: dict = field(default_factory=dict)
    quantile_levels: tuple = (0.5, 0.9)

    def validated(self) -> "ExperimentConfig":
        if self.method not in METHODS:
            raise ConfigError(f"method: unknown method {self.method!r}")
        kind = self.problem.get("kind")
        if kind not in ("toy", "logreg"):
            raise ConfigError(f"problem.kind: expected 'toy' or 'logreg', got {kind!r}")
        if kind == "toy":
            n = self.problem.get("n", 0)
            if not isinstance(n, int) or n < 1:
                raise ConfigError(f"problem.n: need a positive integer, got {n!r}")
            fam = self.problem.get("noise", "gaussian")
            if fam not in NOISE_FAMILIES and fam != "none":
                raise ConfigError(f"problem.noise: unknown family {fam!r}")
        else:
            if not self.problem.get("path"):
                raise ConfigError("problem.path: a logreg problem needs a dataset path")
        if self.trials < 1:
            raise ConfigError(f"trials: need >= 1, got {self.trials}")
        restart = self.method.startswith("r-")
        if restart:
            if self.epsilon is None or self.epsilon <= 0:
                raise ConfigError("epsilon: restarted methods need a positive target")
        elif self.N is None or self.N < 1:
            raise ConfigError("N: non-restarted methods need a positive iteration count")
        allowed = _COMMON_OVERRIDES | (
            _SSTM_OVERRIDES if "sstm" in self.method else _SGD_OVERRIDES
        )
        for key in self.schedule:
            if key not in allowed:
                raise ConfigError(
                    f"schedule.{key}: not valid for method {self.method!r} "
                    f"(allowed: {sorted(allowed)})"
                )
        return self

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["quantile_levels"] = list(self.quantile_levels)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "quantile_levels" in d:
            d["quantile_levels"] = tuple(d["quantile_levels"])
        return cls(**d)


def build_problem(config: ExperimentConfig):
    """Instantiate the oracle and starting point for a config.

    Returns (oracle, x0, R0, r0); R0/r0 are NaN when no optimum is known and
    no radius was supplied.
    """
    spec = config.problem
    if spec["kind"] == "toy":
        n = spec["n"]
        fam = spec.get("noise", "gaussian")
        noise = None if fam == "none" else NOISE_FAMILIES[fam](n)
        oracle = make_toy(n, noise)
        x0_norm = float(spec.get("x0_norm", 10.0))
        x0 = np.full(n, x0_norm / math.sqrt(n))
        return oracle, x0, x0_norm, 0.5 * x0_norm**2
    path = Path(spec["path"])
    if not path.exists():
        raise ConfigError(f"problem.path: dataset {path} not found")
    oracle = make_logreg(load_libsvm(path))
    oracle.estimate_variance_bound()
    x0 = np.zeros(oracle.dimension)
    cached = load_cached_optimum(path)
    if cached is not None:
        oracle.optimum = cached.x
        oracle.optimal_value = cached.f_star
        R0 = float(np.linalg.norm(x0 - cached.x))
        r0 = oracle.value(x0) - cached.f_star
    elif spec.get("radius"):
        R0 = float(spec["radius"])
        r0 = float("nan")
    else:
        raise ConfigError(
            "problem.radius: no cached optimum next to the dataset; supply an "
            "initial-distance estimate or run solve-reference first"
        )
    return oracle, x0, R0, r0


def build_schedule(config: ExperimentConfig, oracle, x0, R0, r0):
    """Resolve the method + overrides into a schedule or restart plan.

    Returns (runner_kind, schedule_or_plan) with runner_kind one of
    "sgd", "sstm", "restart-sgd", "restart-sstm".
    """
    ov = config.schedule
    scale = float(ov.get("practical_scale", 1.0))
    L = oracle.smoothness
    sigma2 = oracle.variance_bound
    method = config.method
    N = config.N

    if method == "sgd":
        return "sgd", sgd_manual(
            gamma=float(ov.get("gamma", 1.0 / L)),
            lam=math.inf,
            m=int(ov.get("m", 1)),
        )
    if method == "clipped-sgd":
        if "gamma" in ov or "lam" in ov:
            return "sgd", sgd_manual(
                gamma=float(ov.get("gamma", 1.0 / L)),
                lam=float(ov.get("lam", math.inf)),
                m=int(ov.get("m", 1)),
            )
        _need_radius(R0, method)
        sched = sgd_theorem_params(L, sigma2, R0, N, config.beta, practical_scale=scale)
        if "m" in ov:
            sched = dataclasses.replace(sched, m=int(ov["m"]))
        return "sgd", sched
    if method == "d-clipped-sgd":
        m = int(ov.get("m", 1))
        if "epoch_len" in ov:
            period = epoch_boundary_period(int(ov["epoch_len"]), float(ov.get("l_epochs", 1.0)), m)
        elif hasattr(oracle, "n_samples"):
            period = epoch_boundary_period(oracle.n_samples, float(ov.get("l_epochs", 1.0)), m)
        else:
            raise ConfigError(
                "schedule.epoch_len: d-clipped-sgd on a non-finite-sum problem "
                "needs an explicit epoch length"
            )
        if "lam0" not in ov:
            raise ConfigError("schedule.lam0: d-clipped-sgd needs an initial clipping level")
        return "sgd", d_clipped_sgd_schedule(
            gamma=float(ov.get("gamma", 1.0 / L)),
            lam0=float(ov["lam0"]),
            alpha_dec=float(ov.get("alpha_dec", 0.9)),
            period=period,
            m=m,
        )
    if method == "sc-clipped-sgd":
        if oracle.strong_convexity <= 0:
            raise ConfigError("method: sc-clipped-sgd needs a strongly convex oracle")
        if math.isnan(r0):
            raise ConfigError("problem: sc-clipped-sgd needs f(x0) - f* (cached optimum)")
        return "sgd", sgd_strongly_convex_params(
            L, oracle.strong_convexity, sigma2, r0, N, config.beta, practical_scale=scale
        )
    if method == "sstm":
        return "sstm", sstm_manual(
            a=float(ov.get("a", 1.0)), L=L, B=math.inf, N=N, m=int(ov.get("m", 1))
        )
    if method == "clipped-sstm":
        if "a" in ov or "B" in ov:
            return "sstm", sstm_manual(
                a=float(ov.get("a", 1.0)),
                L=L,
                B=float(ov.get("B", math.inf)),
                N=N,
                m=int(ov.get("m", 1)),
            )
        _need_radius(R0, method)
        return "sstm", sstm_batch_policy(
            str(ov.get("policy", "theorem")),
            L, sigma2, R0, N, config.beta,
            a0=ov.get("a0"), practical_scale=scale,
        )
    # restarted methods
    mu = oracle.strong_convexity
    if mu <= 0:
        raise ConfigError(f"method: {method} needs a strongly convex oracle (mu > 0)")
    if math.isnan(r0):
        raise ConfigError(f"method: {method} needs r0 = f(x0) - f*")
    if method == "r-clipped-sstm":
        plan = restart_plan_sstm(L, mu, sigma2, r0, config.epsilon, config.beta,
                                 practical_scale=scale)
        return "restart-sstm", plan
    plan = restart_plan_sgd(L, mu, sigma2, r0, config.epsilon, config.beta,
                            practical_scale=scale)
    return "restart-sgd", plan


def _need_radius(R0: float, method: str):
    if not (R0 > 0) or math.isnan(R0):
        raise ConfigError(f"problem.radius: theorem parameters for {method} need R0")


# ----------------------------------------------------------------------
# Trial execution (worker-safe module level functions)
# ----------------------------------------------------------------------

_WORKER: dict = {}


def _worker_init(config_dict: dict):
    config = ExperimentConfig.from_dict(config_dict).validated()
    oracle, x0, R0, r0 = build_problem(config)
    runner_kind, schedule = build_schedule(config, oracle, x0, R0, r0)
    _WORKER["setup"] = (config, oracle, x0, runner_kind, schedule)


def _run_one_trial(trial: int):
    config, oracle, x0, runner_kind, schedule = _WORKER["setup"]
    stream = RngStream(config.seed).child(trial)
    try:
        if runner_kind == "sgd":
            _, traj = run_sgd(oracle, schedule, config.N, stream, x0=x0,
                              record_every=config.record_every)
        elif runner_kind == "sstm":
            _, traj = run_sstm(oracle, schedule, config.N, stream, x0=x0,
                               record_every=config.record_every)
        else:
            runner = run_restarted_sstm if runner_kind == "restart-sstm" else run_restarted_sgd
            result = runner(oracle, schedule, x0, stream,
                            record_every=config.record_every)
            traj = result.combined_trajectory()
            traj.meta["restart_summary"] = result.summary_dict()
    except TrialAbort as abort:
        traj = abort.partial
        if traj is None:
            raise
    traj.meta["trial"] = trial
    traj.meta["seed"] = config.seed
    return trial, traj


@dataclass
class ExperimentResult:
    outdir: Path
    trajectories: list
    stats: object | None
    provenance: dict


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute all trials and write CSVs, quantile curves, provenance and SVGs.

    Output tree: trial_###.csv per trial, quantiles.csv, provenance.json,
    convergence_iterations.svg, convergence_calls.svg.
    """
    config = config.validated()
    if not config.outdir:
        raise ConfigError("outdir: an output directory is required")
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    _worker_init(config.to_dict())  # also validates problem/schedule eagerly
    _, _, _, runner_kind, schedule = _WORKER["setup"]

    indices = list(range(config.trials))
    if config.workers > 1 and config.trials > 1:
        with ProcessPoolExecutor(
            max_workers=min(config.workers, os.cpu_count() or 1),
            initializer=_worker_init,
            initargs=(config.to_dict(),),
        ) as pool:
            results = list(pool.map(_run_one_trial, indices))
    else:
        results = [_run_one_trial(t) for t in indices]
    results.sort(key=lambda pair: pair[0])
    trajectories = [traj for _, traj in results]

    for trial, traj in results:
        traj.to_csv(outdir / f"trial_{trial:03d}.csv")

    complete = [t for t in trajectories if t.aborted_at < 0]
    stats = None
    if complete:
        grid = complete[0].checkpoint_grid()
        aligned = [t for t in complete if t.checkpoint_grid() == grid]
        if aligned:
            levels = tuple(sorted(set(config.quantile_levels) | {1.0 - config.beta}))
            stats = ensemble_quantiles(aligned, levels)
            _write_quantiles_csv(outdir / "quantiles.csv", stats)
            from .plots import plot_convergence

            plot_convergence(stats, outdir / "convergence_iterations.svg",
                             "iterations", title=config.method)
            plot_convergence(stats, outdir / "convergence_calls.svg",
                             "calls", title=config.method)

    provenance = {
        "config": config.to_dict(),
        "schedule": schedule.to_dict(),
        "runner": runner_kind,
        "trial_seeds": [[config.seed, t] for t in indices],
        "aborted_trials": [t.meta["trial"] for t in trajectories if t.aborted_at >= 0],
        "versions": {"clipopt": __version__, "numpy": np.__version__},
    }
    (outdir / "provenance.json").write_text(json.dumps(provenance, indent=1))
    return ExperimentResult(outdir=outdir, trajectories=trajectories,
                            stats=stats, provenance=provenance)


def _write_quantiles_csv(path, stats):
    header = ["k", "calls"] + [f"q{level:g}" for level in stats.levels]
    lines = [",".join(header)]
    for i in range(stats.ks.size):
        row = [str(int(stats.ks[i])), str(int(stats.calls[i]))]
        row += [repr(float(stats.quantiles[j, i])) for j in range(len(stats.levels))]
        lines.append(",".join(row))
    Path(path).write_text("\n".join(lines) + "\n")


# ----------------------------------------------------------------------
# Dataset diagnostics (gradient-norm histograms at the reference optimum)
# ----------------------------------------------------------------------

def run_diagnostic(dataset_path, outdir, solve: bool = False, bins: int = 30,
                   tol: float = 1e-8) -> dict:
    """Histogram of per-sample gradient norms at the dataset's optimum plus a
    tail-heaviness score; writes CSV and SVG into `outdir`.

    Without a cached optimum the reference problem is solved only when
    `solve=True`, otherwise this raises.
    """
    dataset_path = Path(dataset_path)
    problem = make_logreg(load_libsvm(dataset_path))
    cached = load_cached_optimum(dataset_path)
    if cached is None:
        if not solve:
            raise FileNotFoundError(
                f"no cached optimum next to {dataset_path}; pass solve=True "
                "(or the --solve flag) to compute one"
            )
        cached = solve_reference(problem, tol=tol)
        save_cached_optimum(dataset_path, cached)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    hist = gradient_norm_histogram(problem, cached.x, bins=bins)
    score = subgaussian_diagnostic(hist._samples)
    classification = "light" if score < LIGHT_TAIL_MAX_RATIO else "heavy"

    name = dataset_path.name
    csv_path = outdir / f"{name}_gradient_norms.csv"
    lines = ["bin_left,bin_right,count"]
    for i in range(hist.counts.size):
        lines.append(f"{hist.edges[i]!r},{hist.edges[i + 1]!r},{int(hist.counts[i])}")
    csv_path.write_text("\n".join(lines) + "\n")

    from .plots import plot_histogram

    svg_path = outdir / f"{name}_gradient_norms.svg"
    plot_histogram(hist, svg_path, title=f"{name}: ||grad f_i(x*)||")

    report = {
        "dataset": str(dataset_path),
        "n_samples": hist.n_samples,
        "mean": hist.mean,
        "variance": hist.variance,
        "ks_fitted_normal": hist.ks_against_fitted_normal(),
        "subgaussian_ratio": score,
        "classification": classification,
        "csv": str(csv_path),
        "svg": str(svg_path),
    }
    (outdir / f"{name}_diagnostic.json").write_text(json.dumps(report, indent=1))
    return report
