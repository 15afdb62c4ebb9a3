"""Deterministic, seedable particle swarm optimization.

Global-best swarms with inertia, constricted and polynomial-related parameter
settings, heterogeneous sub-swarms, windowed relative-error stopping criteria
and cut-off / preserving-feasibility / penalty constraint handling.
"""
from .constraints import ConstraintSet, PenaltyState
from .engine import (
    PRESETS,
    RunRecord,
    SubSwarmSpec,
    SwarmConfig,
    init_swarm,
    preset_config,
    run,
    step,
)
from .harness import BatchSpec, batch_run, export_trace, read_csv, trajectory_study
from .kinematics import (
    Linear,
    ParameterSet,
    TrajectoryStudyConfig,
    constricted_parameter_set,
    constriction_factor,
    polynomial_acceleration,
    simulate_single_particle,
)
from .objectives import BENCHMARKS, ObjectiveSpec, UserObjective, benchmark_spec
from .stopping import StoppingConfig

__version__ = "0.1.0"

__all__ = [
    "ConstraintSet",
    "PenaltyState",
    "PRESETS",
    "RunRecord",
    "SubSwarmSpec",
    "SwarmConfig",
    "init_swarm",
    "preset_config",
    "run",
    "step",
    "Linear",
    "ParameterSet",
    "TrajectoryStudyConfig",
    "constricted_parameter_set",
    "constriction_factor",
    "polynomial_acceleration",
    "simulate_single_particle",
    "BatchSpec",
    "batch_run",
    "export_trace",
    "read_csv",
    "trajectory_study",
    "BENCHMARKS",
    "ObjectiveSpec",
    "UserObjective",
    "benchmark_spec",
    "StoppingConfig",
]
