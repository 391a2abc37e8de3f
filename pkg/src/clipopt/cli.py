"""Command-line interface.

Subcommands: ``run`` (config-driven experiment), ``diagnose`` (gradient-norm
tail histogram for a dataset), ``verify`` (the acceptance suite) and
``solve-reference`` (cache a high-accuracy optimum next to a dataset).
Exit codes: 0 success, 1 criterion or trial failure, 2 usage error.
The default output directory can be set through ``CLIPOPT_OUTDIR``.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _default_outdir() -> str:
    return os.environ.get("CLIPOPT_OUTDIR", "clipopt-out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clipopt",
        description="Clipped stochastic optimization experiments under "
        "heavy-tailed gradient noise.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a (possibly multi-trial) experiment")
    run.add_argument("--config", type=str, help="JSON config file")
    run.add_argument("--method", type=str, help="optimization method")
    run.add_argument("--toy-n", type=int, help="toy problem dimension")
    run.add_argument("--noise", type=str,
                     choices=["gaussian", "weibull", "burr", "none"],
                     help="toy noise family")
    run.add_argument("--x0-norm", type=float, help="toy starting-point norm")
    run.add_argument("--dataset", type=str, help="LIBSVM dataset path (logreg)")
    run.add_argument("--radius", type=float,
                     help="initial distance estimate R0 for data problems "
                     "without a cached optimum")
    run.add_argument("--iterations", "-N", type=int, dest="N")
    run.add_argument("--epsilon", type=float, help="target accuracy (restarts)")
    run.add_argument("--beta", type=float, help="confidence level")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--record-every", type=int)
    run.add_argument("--workers", type=int)
    run.add_argument("--outdir", type=str)
    run.add_argument("--gamma", type=float, help="stepsize override")
    run.add_argument("--lam", "--lambda", dest="lam", type=float,
                     help="clipping level override (SGD family)")
    run.add_argument("--B", type=float, help="clip scale override (accelerated)")
    run.add_argument("--a", type=float, help="stepsize coefficient (accelerated)")
    run.add_argument("--m", type=int, help="batch size override")
    run.add_argument("--lam0", type=float, help="initial clipping level (d-clipped)")
    run.add_argument("--l-epochs", type=float, help="decay period in epochs (d-clipped)")
    run.add_argument("--alpha-dec", type=float, help="decay factor (d-clipped)")
    run.add_argument("--epoch-len", type=int, help="iterations per epoch for "
                     "non-finite-sum problems (d-clipped)")
    run.add_argument("--policy", type=str,
                     choices=["theorem", "medium", "constant", "combined"],
                     help="accelerated batch policy")
    run.add_argument("--practical-scale", type=float,
                     help="multiplier on the analysis constants")

    diag = sub.add_parser("diagnose", help="gradient-norm tail histogram for a dataset")
    diag.add_argument("dataset", type=str)
    diag.add_argument("--solve", action="store_true",
                      help="solve for the optimum if no cache exists")
    diag.add_argument("--bins", type=int, default=30)
    diag.add_argument("--tol", type=float, default=1e-8)
    diag.add_argument("--outdir", type=str)

    ver = sub.add_parser("verify", help="run the acceptance suite")
    ver.add_argument("--level", choices=["fast", "full"], default="fast")
    ver.add_argument("--data-dir", type=str, default="data",
                     help="directory searched for benchmark datasets")
    ver.add_argument("--workers", type=int, default=max(1, (os.cpu_count() or 1)))
    ver.add_argument("--report", type=str, help="write a JSON report here")

    solve = sub.add_parser("solve-reference",
                           help="cache a high-accuracy optimum next to a dataset")
    solve.add_argument("dataset", type=str)
    solve.add_argument("--tol", type=float, default=1e-8)
    solve.add_argument("--max-iter", type=int, default=200_000)
    return parser


# flag name -> (config section, key)
_SCHEDULE_FLAGS = ("gamma", "lam", "B", "a", "m", "lam0", "l_epochs",
                   "alpha_dec", "epoch_len", "policy", "practical_scale")
_TOP_FLAGS = ("method", "N", "epsilon", "beta", "trials", "seed",
              "record_every", "workers", "outdir")


def _config_from_args(args) -> dict:
    """Merge config file and flags; a flag always wins over the file."""
    config: dict = {}
    if args.config:
        config = json.loads(Path(args.config).read_text())
    problem = dict(config.get("problem", {}))
    if args.dataset:
        problem = {"kind": "logreg", "path": args.dataset}
        if args.radius is not None:
            problem["radius"] = args.radius
    elif args.toy_n is not None or (not problem and args.method):
        problem.setdefault("kind", "toy")
    if problem.get("kind") == "toy":
        if args.toy_n is not None:
            problem["n"] = args.toy_n
        if args.noise is not None:
            problem["noise"] = args.noise
        if args.x0_norm is not None:
            problem["x0_norm"] = args.x0_norm
    elif args.radius is not None:
        problem["radius"] = args.radius
    config["problem"] = problem

    for key in _TOP_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            config[key] = val
    schedule = dict(config.get("schedule", {}))
    for key in _SCHEDULE_FLAGS:
        val = getattr(args, key, None)
        if val is not None:
            schedule[key] = val
    config["schedule"] = schedule
    config.setdefault("outdir", _default_outdir())
    return config


def _cmd_run(args) -> int:
    from .experiments import ConfigError, ExperimentConfig, run_experiment

    try:
        config = ExperimentConfig.from_dict(_config_from_args(args))
        result = run_experiment(config)
    except (ConfigError, TypeError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    aborted = result.provenance["aborted_trials"]
    print(f"wrote {len(result.trajectories)} trial(s) to {result.outdir}")
    if aborted:
        print(f"warning: trials aborted on non-finite values: {aborted}",
              file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


def _cmd_diagnose(args) -> int:
    from .experiments import run_diagnostic

    outdir = args.outdir or _default_outdir()
    try:
        report = run_diagnostic(args.dataset, outdir, solve=args.solve,
                                bins=args.bins, tol=args.tol)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(json.dumps(report, indent=1))
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .verify import verify_suite

    results = verify_suite(level=args.level, data_dir=args.data_dir,
                           workers=args.workers)
    if args.report:
        payload = [
            {
                "index": r.index,
                "name": r.name,
                "status": r.status,
                "detail": r.detail,
                "measured": _jsonable(r.measured),
                "runtime_s": r.runtime_s,
            }
            for r in results
        ]
        Path(args.report).write_text(json.dumps(payload, indent=1))
    failed = [r for r in results if r.passed is False]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed "
          f"({sum(1 for r in results if r.passed is None)} skipped)")
    return EXIT_FAILURE if failed else EXIT_OK


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if hasattr(obj, "item"):
        return obj.item()
    return obj


def _cmd_solve_reference(args) -> int:
    from .problems import load_libsvm, make_logreg, save_cached_optimum, solve_reference

    path = Path(args.dataset)
    if not path.exists():
        print(f"error: dataset {path} not found", file=sys.stderr)
        return EXIT_USAGE
    problem = make_logreg(load_libsvm(path))
    sol = solve_reference(problem, tol=args.tol, max_iter=args.max_iter)
    cache = save_cached_optimum(path, sol)
    print(
        f"f* = {sol.f_star:.10g}, ||grad|| = {sol.grad_norm:.3e} "
        f"({sol.stop_reason} after {sol.iterations} iterations) -> {cache}"
    )
    if not sol.converged:
        print("warning: gradient-norm target not reached; the cached value is "
              "an upper-bound estimate", file=sys.stderr)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code) if exc.code else EXIT_OK
    handlers = {
        "run": _cmd_run,
        "diagnose": _cmd_diagnose,
        "verify": _cmd_verify,
        "solve-reference": _cmd_solve_reference,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
