"""Swarm orchestration: initialization, the synchronous step and the run loop.

A swarm is a list of sub-swarms, each with its own :class:`ParameterSet` and a
role. Minimizers are drawn towards the best position found so far; maximizers
are drawn towards the worst one and exist to supply the worst-conflict record
that normalizes the stopping measures. Every evaluated conflict, whatever
particle produced it, may become either the best or the worst record.

Random stream order for a run seeded with ``seed``:

1. initial positions, particle by particle (rejection attempts included),
2. initial velocities, ``(m, n)`` block,
3. each step, one ``(m, n, 2)`` block of uniform draws.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .constraints import (
    CONSTRAINT_MODES,
    ConstraintSet,
    PenaltyState,
    feasible_initialize,
    feasible_mask,
    update_lambda,
)
from .kinematics import ParameterSet, clamp_velocity, realized_weights, update_velocity
from .objectives import ObjectiveSpec, UserObjective, benchmark_spec
from .stopping import (
    MEASURES,
    StoppingConfig,
    StoppingState,
    record_step,
    relative_errors,
    set1_met,
    set1_start,
    set2_met,
)

__all__ = [
    "ConfigError",
    "EvaluationError",
    "SubSwarmSpec",
    "SwarmConfig",
    "SwarmState",
    "RunRecord",
    "PRESETS",
    "init_swarm",
    "step",
    "run",
    "preset_config",
]

MINIMIZER = "minimizer"
MAXIMIZER = "maximizer"
TERMINATIONS = ("set1", "set2", "tmax")


class ConfigError(ValueError):
    """Invalid swarm configuration."""


class EvaluationError(RuntimeError):
    """The objective returned a non-finite conflict or raised."""


@dataclass(frozen=True)
class SubSwarmSpec:
    count: int
    params: ParameterSet
    role: str = MINIMIZER
    in_clustering_group: Optional[bool] = None

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("sub-swarm count must be >= 1")
        if self.role not in (MINIMIZER, MAXIMIZER):
            raise ConfigError(f"role must be {MINIMIZER!r} or {MAXIMIZER!r}")
        if self.in_clustering_group is None:
            object.__setattr__(self, "in_clustering_group", self.role == MINIMIZER)


Objective = Union[ObjectiveSpec, UserObjective]


@dataclass(frozen=True)
class SwarmConfig:
    sub_swarms: Sequence[SubSwarmSpec]
    objective: Objective
    constraint_mode: str = "preserve"
    constraints: ConstraintSet = field(default_factory=ConstraintSet)
    stopping: StoppingConfig = field(default_factory=StoppingConfig)
    seed: int = 0
    init_region: Optional[Tuple[np.ndarray, np.ndarray]] = None
    velocity_init: str = "vmax"
    penalty: PenaltyState = field(default_factory=PenaltyState)
    reset_infeasible_velocity: bool = False
    max_init_attempts: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "sub_swarms", tuple(self.sub_swarms))
        if not any(s.role == MINIMIZER for s in self.sub_swarms):
            raise ConfigError("at least one minimizer sub-swarm is required")
        if not any(s.in_clustering_group for s in self.sub_swarms):
            raise ConfigError("the clustering group is empty")
        if self.constraint_mode not in CONSTRAINT_MODES:
            raise ConfigError(f"constraint mode must be one of {CONSTRAINT_MODES}")
        if self.constraint_mode == "cutoff" and not self.constraints.box_only:
            raise ConfigError("cutoff handles box bounds only")
        if self.velocity_init not in ("vmax", "zero"):
            raise ConfigError("velocity_init must be 'vmax' or 'zero'")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.init_region is not None:
            lo = np.asarray(self.init_region[0], dtype=float) * np.ones(self.dimension)
            hi = np.asarray(self.init_region[1], dtype=float) * np.ones(self.dimension)
            if np.any(lo >= hi):
                raise ConfigError("init_region lower bounds must be below upper bounds")
            object.__setattr__(self, "init_region", (lo, hi))

    @property
    def dimension(self) -> int:
        return self.objective.dimension

    @property
    def size(self) -> int:
        return sum(s.count for s in self.sub_swarms)

    @property
    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.objective.lower, self.objective.upper

    @cached_property
    def feasible_set(self) -> ConstraintSet:
        """Constraints with the search box standing in for a missing box."""
        if self.constraint_mode == "none":
            return ConstraintSet()
        return self.constraints.with_box(*self.bounds)


@dataclass
class SwarmState:
    """All per-particle arrays (rows are particles) plus the global records."""

    t: int
    x: np.ndarray
    v: np.ndarray
    pbest: np.ndarray
    pbest_conflict: np.ndarray
    conflict: np.ndarray
    raw_conflict: np.ndarray
    feasible: np.ndarray
    gbest: np.ndarray
    cgbest: float
    gworst: np.ndarray
    cgworst: float
    group: np.ndarray
    is_max: np.ndarray
    cluster: np.ndarray
    v_max: np.ndarray
    penalty: Optional[PenaltyState] = None
    gbest_raw: float = math.nan
    constant_weights: Optional[tuple] = None

    @property
    def eligible(self) -> np.ndarray:
        """Particles whose current evaluation may enter memory."""
        return self.feasible if self._preserve else np.ones_like(self.feasible)

    _preserve: bool = False


@dataclass
class RunRecord:
    """Trace and outcome of one run; trace rows are steps 1..``steps``."""

    t: np.ndarray
    cgbest: np.ndarray
    mean_conflict: np.ndarray
    errors: np.ndarray
    best_position: np.ndarray
    best_conflict: float
    termination: str
    steps: int
    seed: int
    best_raw_conflict: float = math.nan
    cgworst: float = math.nan

    def error_snapshot_columns(self):
        return dict(zip(MEASURES, self.errors.T))

    def __eq__(self, other):
        if not isinstance(other, RunRecord):
            return NotImplemented
        arrays = ("t", "cgbest", "mean_conflict", "errors", "best_position")
        scalars = ("best_conflict", "termination", "steps", "seed", "best_raw_conflict", "cgworst")
        return all(
            np.array_equal(getattr(self, a), getattr(other, a), equal_nan=True) for a in arrays
        ) and all(
            getattr(self, s) == getattr(other, s)
            or (isinstance(getattr(self, s), float) and math.isnan(getattr(self, s))
                and math.isnan(getattr(other, s)))
            for s in scalars
        )


def _evaluate(config: SwarmConfig, x: np.ndarray) -> np.ndarray:
    try:
        values = np.asarray(config.objective.evaluate_batch(x), dtype=float)
    except Exception as exc:
        raise EvaluationError(f"objective evaluation failed: {exc}") from exc
    if values.shape != (x.shape[0],) or not np.all(np.isfinite(values)):
        raise EvaluationError("objective returned non-finite or misshaped conflicts")
    return values


def _violations_sq(x: np.ndarray, cs: ConstraintSet) -> np.ndarray:
    total = np.zeros(x.shape[0])
    if cs.box is not None:
        lo, hi = cs.box
        under = np.maximum(0.0, lo - x)
        over = np.maximum(0.0, x - hi)
        total += np.sum(under * under + over * over, axis=1)
    for g in cs.inequalities:
        total += np.array([max(0.0, float(g(p))) ** 2 for p in x])
    for h in cs.equalities:
        total += np.array([float(h(p)) ** 2 for p in x])
    return total


def _conflicts(config: SwarmConfig, state: SwarmState, x: np.ndarray):
    """Raw and working conflicts plus the feasibility mask for positions ``x``."""
    raw = _evaluate(config, x)
    cs = config.feasible_set
    feasible = feasible_mask(x, cs) if not cs.is_empty else np.ones(x.shape[0], dtype=bool)
    if config.constraint_mode == "penalty":
        conflict = raw + state.penalty.lam * _violations_sq(x, cs)
    else:
        conflict = raw
    return raw, conflict, feasible


def _group_weights(config: SwarmConfig, group: np.ndarray, t: int):
    """Per-particle ``(m, 1)`` weight columns in force at step ``t``."""
    t_max = config.stopping.t_max
    table = np.array([realized_weights(s.params, t, t_max) for s in config.sub_swarms])
    per_particle = table[group]
    return per_particle[:, 0:1], per_particle[:, 1:2], per_particle[:, 2:3]


def _weights_at(config: SwarmConfig, state: SwarmState, t: int):
    if state.constant_weights is None:
        return _group_weights(config, state.group, t)
    return state.constant_weights


def init_swarm(config: SwarmConfig, rng) -> SwarmState:
    """Place every particle, draw velocities and seed the best/worst records."""
    m, n = config.size, config.dimension
    lo, hi = config.bounds
    init_lo, init_hi = config.init_region if config.init_region is not None else (lo, hi)
    cs = config.feasible_set
    mode = config.constraint_mode

    if mode == "preserve":
        x = np.empty((m, n))
        for i in range(m):
            x[i], _ = feasible_initialize(rng, init_lo, init_hi, cs, config.max_init_attempts)
    else:
        x = init_lo + (init_hi - init_lo) * rng.random((m, n))
        if mode == "cutoff":
            x = np.clip(x, *cs.box)

    group = np.concatenate([np.full(s.count, k) for k, s in enumerate(config.sub_swarms)])
    is_max = np.concatenate([np.full(s.count, s.role == MAXIMIZER) for s in config.sub_swarms])
    cluster = np.concatenate(
        [np.full(s.count, bool(s.in_clustering_group)) for s in config.sub_swarms]
    )
    default_vmax = 0.5 * (hi - lo)
    v_max = np.empty((m, n))
    for k, s in enumerate(config.sub_swarms):
        vm = default_vmax if s.params.v_max is None else s.params.v_max
        v_max[group == k] = np.broadcast_to(np.asarray(vm, dtype=float), (n,))

    if config.velocity_init == "vmax":
        v = -v_max + 2.0 * v_max * rng.random((m, n))
    else:
        v = np.zeros((m, n))

    state = SwarmState(
        t=0, x=x, v=v, pbest=x.copy(), pbest_conflict=np.empty(m), conflict=np.empty(m),
        raw_conflict=np.empty(m), feasible=np.ones(m, dtype=bool),
        gbest=np.full(n, np.nan), cgbest=math.inf, gworst=np.full(n, np.nan), cgworst=-math.inf,
        group=group, is_max=is_max, cluster=cluster, v_max=v_max,
        penalty=config.penalty if mode == "penalty" else None,
    )
    state._preserve = mode == "preserve"
    if all(s.params.is_constant for s in config.sub_swarms):
        state.constant_weights = _group_weights(config, group, 0)
    raw, conflict, feasible = _conflicts(config, state, x)
    state.raw_conflict, state.conflict, state.feasible = raw, conflict, feasible
    state.pbest_conflict = conflict.copy()
    _update_records(state)
    return state


def _update_records(state: SwarmState) -> None:
    eligible = state.eligible
    if not eligible.any():
        return
    idx = np.flatnonzero(eligible)
    c = state.conflict[idx]
    best = idx[np.argmin(c)]
    if state.conflict[best] < state.cgbest:
        state.cgbest = float(state.conflict[best])
        state.gbest = state.x[best].copy()
        state.gbest_raw = float(state.raw_conflict[best])
    worst = idx[np.argmax(c)]
    if state.conflict[worst] > state.cgworst:
        state.cgworst = float(state.conflict[worst])
        state.gworst = state.x[worst].copy()


def step(state: SwarmState, config: SwarmConfig, rng) -> SwarmState:
    """Advance every particle by one synchronous time-step (in place).

    All particles move against the records as they stood at the start of the
    step; personal and global records are refreshed only after every particle
    has been moved and evaluated.
    """
    t = state.t + 1
    w, iw, sw = _weights_at(config, state, t)
    attractor = np.where(state.is_max[:, None], state.gworst, state.gbest)
    v = update_velocity(state.x, state.v, state.pbest, attractor, w, iw, sw, rng)
    v = clamp_velocity(v, state.v_max)
    x = state.x + v
    if config.constraint_mode == "cutoff":
        x = np.clip(x, *config.feasible_set.box)

    raw, conflict, feasible = _conflicts(config, state, x)
    if config.reset_infeasible_velocity:
        v[~feasible] = 0.0
    state.x, state.v = x, v
    state.raw_conflict, state.conflict, state.feasible = raw, conflict, feasible

    eligible = state.eligible
    improved = np.where(state.is_max, conflict > state.pbest_conflict,
                        conflict < state.pbest_conflict) & eligible
    state.pbest[improved] = x[improved]
    state.pbest_conflict[improved] = conflict[improved]
    _update_records(state)

    if state.penalty is not None:
        mins = np.flatnonzero(~state.is_max)
        leader = mins[np.argmin(conflict[mins])]
        state.penalty = update_lambda(state.penalty, bool(feasible[leader]))
    state.t = t
    return state


def _eligible_conflicts(state: SwarmState) -> np.ndarray:
    return state.conflict[state.eligible]


def run(config: SwarmConfig, observer: Optional[Callable[[SwarmState], None]] = None) -> RunRecord:
    """Full run until a termination set is met or ``t_max`` is reached.

    ``observer``, if given, is called with the live state after initialization
    and after every step. It must not modify the state.
    """
    rng = np.random.default_rng(config.seed)
    state = init_swarm(config, rng)
    if observer is not None:
        observer(state)
    stop_cfg = config.stopping
    lo, hi = config.bounds
    stop = StoppingState(span=hi - lo, window=stop_cfg.window)
    cl = state.cluster
    record_step(stop, 0, _eligible_conflicts(state), state.x[cl], state.conflict[cl], state.gbest)

    t_max = stop_cfg.t_max
    cgbest = np.empty(t_max)
    mean_c = np.empty(t_max)
    errors = np.full((t_max, len(MEASURES)), np.nan)
    first_set1 = set1_start(stop_cfg)
    termination = "tmax"
    t = 0
    while t < t_max:
        step(state, config, rng)
        if observer is not None:
            observer(state)
        t = state.t
        record_step(stop, t, _eligible_conflicts(state), state.x[cl], state.conflict[cl],
                    state.gbest)
        row = t - 1
        cgbest[row] = state.cgbest
        mean_c[row] = state.conflict[cl].mean()
        if stop.ready:
            snap = relative_errors(stop)
            errors[row] = snap.as_tuple()
            if t >= first_set1 and set1_met(snap, t, stop_cfg):
                termination = "set1"
                break
        if set2_met(stop, t, stop_cfg):
            termination = "set2"
            break
    stop.terminated = True

    return RunRecord(
        t=np.arange(1, t + 1),
        cgbest=cgbest[:t].copy(),
        mean_conflict=mean_c[:t].copy(),
        errors=errors[:t].copy(),
        best_position=state.gbest.copy(),
        best_conflict=state.cgbest,
        termination=termination,
        steps=t,
        seed=config.seed,
        best_raw_conflict=state.gbest_raw,
        cgworst=state.cgworst,
    )


# w, iw = sw for each preset group
_BST = ParameterSet(w=0.7, iw=2.0, sw=2.0)
_BST_C = ParameterSet(w=0.7298, iw=1.49609, sw=1.49609)
_BST_P = ParameterSet(w=0.5, iw=2.0, sw=2.0)

PRESETS = {
    "bst": [(30, _BST, True)],
    "bst_c": [(30, _BST_C, True)],
    "bst_p": [(30, _BST_P, True)],
    "gp": [(10, _BST, False), (10, _BST_P, True), (10, _BST_C, True)],
}

MAXIMIZER_PARAMS = _BST


def preset_config(
    name: str,
    function: Union[str, Objective] = "sphere",
    *,
    dimension: Optional[int] = None,
    seed: int = 0,
    t_max: int = 30_000,
    stall_fraction: float = 0.35,
    constraint_mode: str = "preserve",
    constraints: Optional[ConstraintSet] = None,
    maximizers: int = 5,
    **overrides,
) -> SwarmConfig:
    """Named parameter setting applied to a benchmark id or objective.

    Every preset carries a five-particle maximizer by default (``maximizers=0``
    drops it). For ``gp`` only the two fine-clustering minimizer groups feed
    the position and average-conflict stopping measures.
    """
    try:
        groups = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    objective = benchmark_spec(function, dimension) if isinstance(function, str) else function
    subs = [SubSwarmSpec(count, params, MINIMIZER, cluster) for count, params, cluster in groups]
    if maximizers:
        subs.append(SubSwarmSpec(maximizers, MAXIMIZER_PARAMS, MAXIMIZER, False))
    stopping = overrides.pop("stopping", None) or StoppingConfig(
        t_max=t_max, stall_fraction=stall_fraction
    )
    return SwarmConfig(
        sub_swarms=subs,
        objective=objective,
        constraint_mode=constraint_mode,
        constraints=constraints if constraints is not None else ConstraintSet(),
        stopping=stopping,
        seed=seed,
        **overrides,
    )
