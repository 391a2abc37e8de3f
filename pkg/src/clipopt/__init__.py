"""Clipped stochastic first-order methods under heavy-tailed gradient noise.

The package provides the clip operator, clipped SGD and the clipped
accelerated similar-triangles method together with their theorem-exact
parameter schedules, strongly convex restart variants, heavy-tailed noise
generators (Gaussian / Weibull / Burr XII), and a seeded Monte-Carlo
experiment harness with quantile convergence statistics.
"""

__version__ = "0.1.0"

from .clipping import clip, estimate_clipped_stats
from .core import RngStream, StochasticOracle, TrialAbort
from .noise import (
    NoiseModel,
    burr_moment,
    burr_noise,
    gaussian_noise,
    inverse_cdf_sample,
    sample_noise,
    weibull_noise,
)
from .optimizers import Trajectory, run_sgd, run_sstm
from .problems import (
    LogisticRegressionProblem,
    QuadraticToyProblem,
    SparseDataset,
    load_libsvm,
    make_logreg,
    make_toy,
    parse_libsvm,
    serialize_libsvm,
    solve_reference,
)
from .restarts import run_restarted_sgd, run_restarted_sstm
from .schedules import (
    RestartPlan,
    SgdSchedule,
    SstmSchedule,
    restart_plan_sgd,
    restart_plan_sstm,
    sgd_manual,
    sgd_strongly_convex_params,
    sgd_theorem_params,
    small_batch_restart_params,
    sstm_alpha,
    sstm_batch_policy,
    sstm_manual,
    sstm_theorem_params,
)

__all__ = [
    "__version__",
    "RngStream",
    "StochasticOracle",
    "TrialAbort",
    "clip",
    "estimate_clipped_stats",
    "NoiseModel",
    "gaussian_noise",
    "weibull_noise",
    "burr_noise",
    "burr_moment",
    "inverse_cdf_sample",
    "sample_noise",
    "Trajectory",
    "run_sgd",
    "run_sstm",
    "run_restarted_sgd",
    "run_restarted_sstm",
    "QuadraticToyProblem",
    "LogisticRegressionProblem",
    "SparseDataset",
    "make_toy",
    "make_logreg",
    "parse_libsvm",
    "serialize_libsvm",
    "load_libsvm",
    "solve_reference",
    "sstm_alpha",
    "SstmSchedule",
    "SgdSchedule",
    "RestartPlan",
    "sstm_theorem_params",
    "sstm_batch_policy",
    "sstm_manual",
    "sgd_theorem_params",
    "sgd_strongly_convex_params",
    "sgd_manual",
    "restart_plan_sstm",
    "restart_plan_sgd",
    "small_batch_restart_params",
]
