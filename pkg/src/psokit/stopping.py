"""Windowed relative-error measures and the two sets of termination conditions.

Conflict-based measures are normalized by ``cgworst - cgbest``, the spread
between the worst and best conflicts found so far. Position-based measures are
normalized by the search range; coordinates are divided by their own
dimension's range before any norm is taken, which reduces to the usual scalar
normalization on hyper-cubes.

The state keeps a ring buffer of ``window + 1`` per-step scalars plus the full
``cgbest`` history needed by the long stall test of set 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "MEASURES",
    "DEFAULT_THRESHOLDS",
    "StoppingConfig",
    "StoppingState",
    "ErrorSnapshot",
    "record_step",
    "relative_errors",
    "set1_met",
    "set2_met",
    "set1_start",
]

MEASURES = (
    "rel_c_me",
    "rel_p_mse",
    "rel_p_cg_gbest",
    "rel_c_cav",
    "rel_c_cgbest",
    "rel_p_cg",
    "rel_p_gbest",
)

DEFAULT_THRESHOLDS = (1e-12, 1e-9, 1e-9, 1e-12, 1e-15, 1e-9, 1e-12)

# Below this spread the swarm is treated as fully converged.
_DEGENERATE_SPREAD = 1e-300

_ROWS = ("cbar", "cgbest", "mse", "cg_gbest", "cg_step", "gbest_step")
_CBAR, _CGBEST, _MSE, _CG_GBEST, _CG_STEP, _GBEST_STEP = range(len(_ROWS))


@dataclass(frozen=True)
class StoppingConfig:
    t_max: int = 30_000
    min_fraction: float = 0.1
    stall_fraction: float = 0.35
    window: int = 100
    thresholds: Sequence[float] = DEFAULT_THRESHOLDS

    def __post_init__(self):
        if self.t_max < 1:
            raise ValueError("t_max must be positive")
        if not 0 < self.min_fraction < 1:
            raise ValueError("min_fraction must lie in (0, 1)")
        if not 0 < self.stall_fraction < 1:
            raise ValueError("stall_fraction must lie in (0, 1)")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        thresholds = tuple(float(x) for x in self.thresholds)
        if len(thresholds) != len(MEASURES) or min(thresholds) <= 0:
            raise ValueError(f"need {len(MEASURES)} positive thresholds")
        object.__setattr__(self, "thresholds", thresholds)

    @property
    def stall_steps(self) -> int:
        return int(math.floor(self.stall_fraction * self.t_max))


@dataclass(frozen=True)
class ErrorSnapshot:
    rel_c_me: float
    rel_p_mse: float
    rel_p_cg_gbest: float
    rel_c_cav: float
    rel_c_cgbest: float
    rel_p_cg: float
    rel_p_gbest: float

    def as_tuple(self):
        return (self.rel_c_me, self.rel_p_mse, self.rel_p_cg_gbest, self.rel_c_cav,
                self.rel_c_cgbest, self.rel_p_cg, self.rel_p_gbest)


@dataclass
class StoppingState:
    """Rolling history for one run.

    ``span`` is the per-dimension (or scalar) search range used to normalize
    positions.
    """

    span: np.ndarray
    window: int = 100
    t: int = -1
    cgbest: float = math.inf
    cgworst: float = -math.inf
    terminated: bool = False
    cgbest_history: list = field(default_factory=list)
    # ring buffer, one row per quantity (see _ROWS), column t % (window + 1)
    _buf: np.ndarray = field(init=False, repr=False)
    _steps: np.ndarray = field(init=False, repr=False)
    _prev_cg: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    _prev_gbest: Optional[np.ndarray] = field(default=None, init=False, repr=False)
    m: int = field(default=0, init=False)
    n: int = field(default=0, init=False)

    def __post_init__(self):
        self.span = np.asarray(self.span, dtype=float)
        if np.any(self.span <= 0):
            raise ValueError("search range must be positive")
        size = self.window + 1
        self._buf = np.zeros((len(_ROWS), size))
        self._steps = np.full(size, -1, dtype=np.int64)

    def window_steps(self) -> np.ndarray:
        """Time-steps currently held in the ring buffer, oldest first."""
        steps = self._steps[self._steps >= 0]
        return np.sort(steps)

    @property
    def ready(self) -> bool:
        return self.t >= self.window


def record_step(state: StoppingState, t: int, conflicts, cluster_positions,
                cluster_conflicts, gbest) -> StoppingState:
    """Advance the history by one time-step (in place; returns ``state``).

    ``conflicts`` are all evaluations eligible for the best/worst records this
    step (every particle, minimizers and maximizers alike). The clustering
    group supplies positions ``(m, n)`` and current conflicts ``(m,)``.
    """
    if state.terminated:
        raise RuntimeError("run already terminated; no further steps may be recorded")
    if t != state.t + 1:
        raise ValueError(f"out-of-order step: expected t={state.t + 1}, got t={t}")

    conflicts = np.asarray(conflicts, dtype=float)
    if conflicts.size:
        state.cgbest = min(state.cgbest, float(conflicts.min()))
        state.cgworst = max(state.cgworst, float(conflicts.max()))

    span = state.span
    pos = np.asarray(cluster_positions, dtype=float) / span
    g = np.asarray(gbest, dtype=float) / span
    cg = pos.sum(axis=0) / pos.shape[0]
    state.m, state.n = pos.shape

    col = state._buf[:, t % (state.window + 1)]
    state._steps[t % (state.window + 1)] = t
    cluster_conflicts = np.asarray(cluster_conflicts, dtype=float)
    col[_CBAR] = cluster_conflicts.sum() / cluster_conflicts.size
    col[_CGBEST] = state.cgbest
    diff = (pos - g).ravel()
    col[_MSE] = math.sqrt(diff @ diff)
    d = cg - g
    col[_CG_GBEST] = math.sqrt(d @ d)
    if state._prev_cg is None:
        col[_CG_STEP] = col[_GBEST_STEP] = 0.0
    else:
        d = cg - state._prev_cg
        col[_CG_STEP] = math.sqrt(d @ d)
        d = g - state._prev_gbest
        col[_GBEST_STEP] = math.sqrt(d @ d)
    state._prev_cg = cg
    state._prev_gbest = g
    state.cgbest_history.append(state.cgbest)
    state.t = t
    return state


def relative_errors(state: StoppingState) -> ErrorSnapshot:
    """The seven relative errors over the last ``window`` steps at ``state.t``."""
    if not state.ready:
        raise ValueError(
            f"need {state.window + 1} recorded steps, have {state.t + 1}"
        )
    W = state.window
    oldest = (state.t - W) % (W + 1)
    newest = state.t % (W + 1)
    buf = state._buf
    # sums over the W most recent steps, i.e. every column except the oldest
    sums = buf[:, :oldest].sum(axis=1) + buf[:, oldest + 1:].sum(axis=1)

    spread = state.cgworst - state.cgbest
    if spread < _DEGENERATE_SPREAD:
        c_me = c_cav = c_cgbest = 0.0
    else:
        denom = W * spread
        gap = buf[_CBAR] - buf[_CGBEST]
        c_me = (gap[:oldest].sum() + gap[oldest + 1:].sum()) / denom
        c_cav = abs(buf[_CBAR, newest] - buf[_CBAR, oldest]) / denom
        c_cgbest = (buf[_CGBEST, oldest] - buf[_CGBEST, newest]) / denom

    root_n = math.sqrt(state.n)
    p_mse = sums[_MSE] / (W * math.sqrt(state.m * state.n))
    p_cg_gbest = sums[_CG_GBEST] / (W * root_n)
    p_cg = sums[_CG_STEP] / (W * root_n)
    p_gbest = sums[_GBEST_STEP] / (W * root_n)
    return ErrorSnapshot(float(c_me), float(p_mse), float(p_cg_gbest), float(c_cav),
                         float(c_cgbest), float(p_cg), float(p_gbest))


def set1_start(config: StoppingConfig) -> int:
    """First step at which set 1 is checked (window warm-up included)."""
    return max(config.window, math.ceil(config.min_fraction * config.t_max))


def set1_met(snapshot: ErrorSnapshot, t: int, config: StoppingConfig) -> bool:
    """Clustering-based termination: minimum run length and all seven bounds."""
    if t < config.min_fraction * config.t_max:
        return False
    return all(value <= bound for value, bound in zip(snapshot.as_tuple(), config.thresholds))


def set2_met(state: StoppingState, t: int, config: StoppingConfig) -> bool:
    """Stall-based termination: no change in cgbest over ``stall_fraction * t_max`` steps."""
    if t <= config.stall_fraction * config.t_max:
        return False
    history = state.cgbest_history
    then = t - config.stall_steps
    if then < 0 or t >= len(history):
        return False
    return history[then] - history[t] == 0
