"""Batch experiments, benchmark replication sweeps and CSV export.

CSV files use the shortest round-trip representation of each float, so
reloading a file reproduces the values bit for bit. Error columns are left
empty for steps before the stopping window has filled.
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .engine import RunRecord, SwarmConfig, preset_config, run
from .kinematics import TrajectoryStudyConfig, simulate_single_particle
from .stopping import MEASURES, StoppingConfig

__all__ = [
    "TRACE_HEADER",
    "RUNS_HEADER",
    "STUDY_SETUPS",
    "BatchSpec",
    "BatchSummary",
    "Table3Row",
    "batch_run",
    "summarize",
    "replicate_table3",
    "table3_sweep",
    "trajectory_study",
    "export_trace",
    "read_csv",
]

TRACE_HEADER = ("t", "cgbest", "mean_conflict") + MEASURES
RUNS_HEADER = ("run", "seed", "final_conflict", "steps", "termination")

# Single-particle setups: x0=100, attractor at 0, no velocity clamp.
STUDY_SETUPS = {
    "stochastic_explosion": TrajectoryStudyConfig(
        v0=(-1.0, 1.0), weight_mode="stochastic", iw=2.0, sw=2.0, steps=5000),
    "removed_growth": TrajectoryStudyConfig(
        v0=0.0, weight_mode="removed", iw=2.0, sw=2.0, steps=50),
    "mean_cycle": TrajectoryStudyConfig(v0=0.0, weight_mode="mean", iw=2.0, sw=2.0, steps=30),
    "mean_half_weights": TrajectoryStudyConfig(
        v0=0.0, weight_mode="mean", iw=0.5, sw=0.5, steps=5000),
    "stochastic_half_weights": TrajectoryStudyConfig(
        v0=0.0, weight_mode="stochastic", iw=0.5, sw=0.5, steps=5000),
}


def _fmt(value) -> str:
    value = float(value)
    return "" if math.isnan(value) else repr(value)


@dataclass(frozen=True)
class BatchSpec:
    """``n_runs`` runs of ``base`` with seeds ``base_seed + run_index``."""

    base: SwarmConfig
    n_runs: int = 50
    base_seed: Optional[int] = None

    def __post_init__(self):
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")

    def seeds(self) -> List[int]:
        start = self.base.seed if self.base_seed is None else self.base_seed
        return [start + i for i in range(self.n_runs)]


@dataclass
class BatchSummary:
    """Pointwise means over runs plus per-run outcomes.

    Runs that stop before ``t_max`` are held at their final values for the
    curve means; ``n_padded[t]`` counts how many runs were padded at step t.
    """

    t: np.ndarray
    mean_best: np.ndarray
    mean_avg: np.ndarray
    n_padded: np.ndarray
    runs: np.ndarray
    seeds: np.ndarray
    final_conflicts: np.ndarray
    steps: np.ndarray
    terminations: List[str]
    acceptable_error: Optional[float] = None
    failures: Dict[int, str] = field(default_factory=dict)

    @property
    def success_rate(self) -> float:
        if self.acceptable_error is None or len(self.final_conflicts) == 0:
            return math.nan
        return float(np.mean(self.final_conflicts < self.acceptable_error))


def summarize(results: Sequence[Tuple[int, Union[RunRecord, Exception]]], t_max: int,
              acceptable_error: Optional[float] = None) -> BatchSummary:
    """Aggregate ``(run_index, record)`` pairs; order of ``results`` is irrelevant."""
    results = sorted(results, key=lambda item: item[0])
    done = [(i, r) for i, r in results if isinstance(r, RunRecord)]
    failures = {i: f"{type(r).__name__}: {r}" for i, r in results if not isinstance(r, RunRecord)}
    best = np.empty((len(done), t_max))
    avg = np.empty((len(done), t_max))
    padded = np.zeros(t_max, dtype=np.int64)
    for row, (_, rec) in enumerate(done):
        k = rec.steps
        best[row, :k] = rec.cgbest
        avg[row, :k] = rec.mean_conflict
        best[row, k:] = rec.cgbest[-1]
        avg[row, k:] = rec.mean_conflict[-1]
        padded[k:] += 1
    return BatchSummary(
        t=np.arange(1, t_max + 1),
        mean_best=best.mean(axis=0) if done else np.full(t_max, np.nan),
        mean_avg=avg.mean(axis=0) if done else np.full(t_max, np.nan),
        n_padded=padded,
        runs=np.array([i for i, _ in done], dtype=np.int64),
        seeds=np.array([r.seed for _, r in done], dtype=np.int64),
        final_conflicts=np.array([r.best_conflict for _, r in done]),
        steps=np.array([r.steps for _, r in done], dtype=np.int64),
        terminations=[r.termination for _, r in done],
        acceptable_error=acceptable_error,
        failures=failures,
    )


def _run_one(config: SwarmConfig) -> Union[RunRecord, Exception]:
    try:
        return run(config)
    except Exception as exc:  # recorded per run, the batch carries on
        return exc


def batch_run(spec: BatchSpec, workers: int = 1) -> BatchSummary:
    """Execute every run of ``spec`` and aggregate.

    ``workers > 1`` spreads runs over processes (the objective must then be
    picklable); results do not depend on the worker count.
    """
    configs = [replace(spec.base, seed=s) for s in spec.seeds()]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_one, configs))
    else:
        records = [_run_one(c) for c in configs]
    return summarize(
        list(enumerate(records)),
        spec.base.stopping.t_max,
        getattr(spec.base.objective, "acceptable_error", None),
    )


@dataclass(frozen=True)
class Table3Row:
    preset: str
    function_id: str
    seed: int
    final_conflict: float
    steps: int
    termination: str


def replicate_table3(preset: str, function_id: str, seed: int = 0, *, t_max: int = 30_000,
                     stall_fraction: float = 0.25) -> Table3Row:
    """One run of a preset on a test-suite function under the replication settings."""
    config = preset_config(preset, function_id, seed=seed, t_max=t_max,
                           stall_fraction=stall_fraction)
    record = run(config)
    return Table3Row(preset, function_id, seed, record.best_conflict, record.steps,
                     record.termination)


def table3_sweep(presets=("bst_c", "bst_p", "gp"), functions=None, seed: int = 0,
                 **kwargs) -> List[Table3Row]:
    from .objectives import BENCHMARKS

    functions = list(BENCHMARKS) if functions is None else list(functions)
    return [replicate_table3(p, f, seed, **kwargs) for f in functions for p in presets]


def trajectory_study(config: TrajectoryStudyConfig, path) -> str:
    """Simulate one particle and write ``t,x,v`` rows to ``path``."""
    traj = simulate_single_particle(config)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t", "x", "v"))
        for t, x, v in zip(traj.t, traj.x, traj.v):
            writer.writerow((int(t), repr(float(x)), repr(float(v))))
    return str(path)


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def export_trace(record: Union[RunRecord, BatchSummary, Sequence[Table3Row]], path,
                 format: str = "csv"):
    """Write a run trace (``path`` is a file) or a batch summary (``path`` is a directory).

    A batch summary produces ``mean_best.csv``, ``mean_avg.csv`` and
    ``runs.csv`` inside ``path``. Returns the list of files written.
    """
    if format != "csv":
        raise ValueError(f"unsupported export format {format!r}")
    if isinstance(record, RunRecord):
        rows = (
            (int(t), _fmt(b), _fmt(c), *(_fmt(e) for e in errs))
            for t, b, c, errs in zip(record.t, record.cgbest, record.mean_conflict, record.errors)
        )
        _write_rows(path, TRACE_HEADER, rows)
        return [str(path)]
    if isinstance(record, BatchSummary):
        os.makedirs(path, exist_ok=True)
        files = [os.path.join(path, name) for name in ("mean_best.csv", "mean_avg.csv", "runs.csv")]
        _write_rows(files[0], ("t", "mean_best", "n_padded"),
                    ((int(t), _fmt(v), int(p))
                     for t, v, p in zip(record.t, record.mean_best, record.n_padded)))
        _write_rows(files[1], ("t", "mean_avg", "n_padded"),
                    ((int(t), _fmt(v), int(p))
                     for t, v, p in zip(record.t, record.mean_avg, record.n_padded)))
        _write_rows(files[2], RUNS_HEADER,
                    ((int(r), int(s), _fmt(c), int(k), term)
                     for r, s, c, k, term in zip(record.runs, record.seeds,
                                                 record.final_conflicts, record.steps,
                                                 record.terminations)))
        return files
    rows = list(record)
    if rows and all(isinstance(r, Table3Row) for r in rows):
        _write_rows(path, ("preset", "function", "seed", "final_conflict", "steps", "termination"),
                    ((r.preset, r.function_id, r.seed, _fmt(r.final_conflict), r.steps,
                      r.termination) for r in rows))
        return [str(path)]
    raise TypeError(f"cannot export {type(record).__name__}")


def read_csv(path) -> Dict[str, np.ndarray]:
    """Load a CSV written by this module into columns; numeric where possible."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = list(reader)
    columns = {}
    for j, name in enumerate(header):
        raw = [row[j] for row in rows]
        try:
            columns[name] = np.array([float(v) if v != "" else np.nan for v in raw])
        except ValueError:
            columns[name] = np.array(raw)
    return columns
