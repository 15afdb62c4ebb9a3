"""Command-line entry point: ``psokit {run,batch,study,bench,table3}``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure.
"""
from __future__ import annotations

import argparse
import os
import sys

import yaml

from .engine import PRESETS, ConfigError, preset_config, run
from .harness import (
    STUDY_SETUPS,
    BatchSpec,
    batch_run,
    export_trace,
    table3_sweep,
    trajectory_study,
)
from .kinematics import WEIGHT_MODES, TrajectoryStudyConfig
from .objectives import BENCHMARKS, ObjectiveError, benchmark_spec
from .constraints import CONSTRAINT_MODES, InitializationError

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _common(parser):
    parser.add_argument("--preset", choices=sorted(PRESETS), default="gp")
    parser.add_argument("--function", choices=sorted(BENCHMARKS), default="sphere")
    parser.add_argument("--dim", type=int, default=None)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--runs", type=int, default=50)
    parser.add_argument("--tmax", type=int, default=30_000)
    parser.add_argument("--constraint", choices=CONSTRAINT_MODES, default="preserve")
    parser.add_argument("--stall-fraction", type=float, default=0.35)
    parser.add_argument("--out", default=None)
    parser.add_argument("--config", default=None,
                        help="YAML/JSON key-value file; its values override the flags")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="psokit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    _common(sub.add_parser("run", help="single run, optional trace CSV"))
    _common(sub.add_parser("batch", help="multi-seed statistics"))
    table3 = sub.add_parser("table3", help="preset x function replication sweep")
    _common(table3)
    table3.set_defaults(tmax=30_000, stall_fraction=0.25, function=None)
    sub.add_parser("bench", help="list the benchmark test suite")

    study = sub.add_parser("study", help="single-particle trajectory study")
    study.add_argument("--setup", choices=sorted(STUDY_SETUPS), default=None,
                       help="named configuration; other study flags except --seed are ignored")
    study.add_argument("--x0", type=float, default=100.0)
    study.add_argument("--v0", type=float, default=0.0)
    study.add_argument("--p", type=float, default=0.0)
    study.add_argument("--mode", choices=WEIGHT_MODES, default="stochastic")
    study.add_argument("--w", type=float, default=1.0)
    study.add_argument("--iw", type=float, default=2.0)
    study.add_argument("--sw", type=float, default=2.0)
    study.add_argument("--vmax", type=float, default=None)
    study.add_argument("--steps", type=int, default=1000)
    study.add_argument("--seed", type=int, default=0)
    study.add_argument("--out", default="trajectory.csv")
    study.add_argument("--config", default=None)
    return parser


def _apply_config_file(args):
    if not getattr(args, "config", None):
        return args
    with open(args.config) as fh:
        values = yaml.safe_load(fh) or {}
    if not isinstance(values, dict):
        raise ConfigError("config file must hold a key-value mapping")
    for key, value in values.items():
        attr = key.replace("-", "_")
        if not hasattr(args, attr):
            raise ConfigError(f"unknown config key {key!r}")
        setattr(args, attr, value)
    return args


def _config(args, seed=None):
    if args.dim is not None and args.dim < 1:
        raise ConfigError("--dim must be positive")
    return preset_config(
        args.preset,
        benchmark_spec(args.function, args.dim),
        seed=args.seed if seed is None else seed,
        t_max=args.tmax,
        stall_fraction=args.stall_fraction,
        constraint_mode=args.constraint,
    )


def _cmd_run(args):
    record = run(_config(args))
    print(f"termination={record.termination} steps={record.steps} "
          f"best_conflict={record.best_conflict!r} seed={record.seed}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "trace.csv")
        export_trace(record, path)
        print(f"trace written to {path}")


def _cmd_batch(args):
    summary = batch_run(BatchSpec(_config(args), n_runs=args.runs))
    counts = {k: summary.terminations.count(k) for k in ("set1", "set2", "tmax")}
    print(f"runs={len(summary.runs)} failures={len(summary.failures)} "
          f"success_rate={summary.success_rate:.3f} terminations={counts}")
    if args.out:
        for path in export_trace(summary, args.out):
            print(f"wrote {path}")
    for run_index, message in summary.failures.items():
        print(f"run {run_index} failed: {message}", file=sys.stderr)


def _cmd_table3(args):
    functions = [args.function] if args.function else None
    rows = table3_sweep(functions=functions, seed=args.seed, t_max=args.tmax,
                        stall_fraction=args.stall_fraction)
    for r in rows:
        print(f"{r.function_id:15s} {r.preset:6s} {r.final_conflict:10.3e} "
              f"{r.steps:6d} {r.termination}")
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        export_trace(rows, os.path.join(args.out, "table3.csv"))


def _cmd_bench(args):
    print(f"{'id':15s} {'n':>3s} {'lower':>8s} {'upper':>8s} {'acceptable':>10s}")
    for fid in BENCHMARKS:
        s = benchmark_spec(fid)
        print(f"{fid:15s} {s.dimension:3d} {s.search_lo:8g} {s.search_hi:8g} "
              f"{s.acceptable_error:10g}")


def _cmd_study(args):
    if args.setup is not None:
        base = STUDY_SETUPS[args.setup]
        config = TrajectoryStudyConfig(**{**base.__dict__, "seed": args.seed})
    else:
        config = TrajectoryStudyConfig(
            x0=args.x0, v0=args.v0, p=args.p, weight_mode=args.mode, w=args.w,
            iw=args.iw, sw=args.sw, v_max=args.vmax, steps=args.steps, seed=args.seed,
        )
    print(f"wrote {trajectory_study(config, args.out)}")


COMMANDS = {
    "run": _cmd_run,
    "batch": _cmd_batch,
    "table3": _cmd_table3,
    "bench": _cmd_bench,
    "study": _cmd_study,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        args = _apply_config_file(args)
        COMMANDS[args.command](args)
    except (ConfigError, ObjectiveError, ValueError, TypeError, yaml.YAMLError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InitializationError, OSError, RuntimeError) as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
