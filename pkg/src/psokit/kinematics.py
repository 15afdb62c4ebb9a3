"""Particle kinematics: velocity/position updates, clamping and parameter relations.

All update rules operate on arrays of any shape ``(..., n)``; the engine passes
the whole swarm as an ``(m, n)`` block so a single call moves every particle.

Random draws are taken from ``rng.random(shape + (2,))``. With C ordering this
fixes the stream order as particle index, then dimension, then term
(individuality draw first, sociality draw second).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

__all__ = [
    "Linear",
    "ParameterSet",
    "PinnedDraws",
    "ScheduleError",
    "TrajectoryStudyConfig",
    "Trajectory",
    "realized_weights",
    "update_velocity",
    "clamp_velocity",
    "update_position",
    "constriction_factor",
    "constricted_parameter_set",
    "polynomial_acceleration",
    "simulate_single_particle",
    "WEIGHT_MODES",
]


class ScheduleError(ValueError):
    """Raised when a weight schedule is queried outside ``[0, t_max]``."""


@dataclass(frozen=True)
class Linear:
    """Weight varying linearly from ``start`` at t=0 to ``end`` at t=t_max."""

    start: float
    end: float

    def at(self, t: float, t_max: float) -> float:
        if t_max <= 0:
            return float(self.start)
        frac = t / t_max
        return float(self.start + (self.end - self.start) * frac)


Weight = Union[float, Linear]


@dataclass(frozen=True)
class ParameterSet:
    """Inertia, individuality and sociality weights plus the velocity clamp.

    ``v_max=None`` means "half the search range", resolved by the engine once
    the bounds are known. Any weight may be a :class:`Linear` schedule.
    """

    w: Weight
    iw: Weight
    sw: Weight
    v_max: Optional[Union[float, np.ndarray]] = None

    def __post_init__(self):
        if self.v_max is not None and np.any(np.asarray(self.v_max) <= 0):
            raise ValueError(f"v_max must be positive, got {self.v_max!r}")
        for name in ("iw", "sw"):
            value = getattr(self, name)
            lows = (value.start, value.end) if isinstance(value, Linear) else (value,)
            if min(lows) < 0:
                raise ValueError(f"{name} must be non-negative, got {value!r}")

    @property
    def is_constant(self) -> bool:
        return not any(isinstance(x, Linear) for x in (self.w, self.iw, self.sw))


def realized_weights(params: ParameterSet, t: int, t_max: int) -> Tuple[float, float, float]:
    """Return the ``(w, iw, sw)`` in force at time-step ``t``."""
    if t < 0 or t > t_max:
        raise ScheduleError(f"time-step {t} outside schedule domain [0, {t_max}]")

    def resolve(value: Weight) -> float:
        if isinstance(value, Linear):
            return value.at(t, t_max)
        return float(value)

    return resolve(params.w), resolve(params.iw), resolve(params.sw)


class PinnedDraws:
    """Stand-in for a random generator that always returns the same draw(s).

    ``value`` may be a scalar or an array broadcastable to the requested size;
    the last axis of the requested size is the (individuality, sociality) pair.
    Used for the mean-replaced (0.5) and removed (1.0) single-particle studies
    and for hand-traceable tests.
    """

    def __init__(self, value=0.5):
        self.value = np.asarray(value, dtype=float)

    def random(self, size=None):
        if size is None:
            return float(self.value)
        return np.broadcast_to(self.value, size).astype(float)


def update_velocity(x, v, pbest, gbest, w, iw, sw, rng) -> np.ndarray:
    """Inertia-weight velocity rule.

    ``v' = w*v + iw*U1*(pbest - x) + sw*U2*(gbest - x)`` with fresh uniform
    draws per component and per term. ``w``, ``iw``, ``sw`` may be scalars or
    arrays broadcastable against ``x`` (e.g. one weight per particle, shape
    ``(m, 1)``). With ``w=1`` this is the original rule; feeding the output of
    :func:`constricted_parameter_set` gives the constricted rule.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    pbest = np.asarray(pbest, dtype=float)
    gbest = np.asarray(gbest, dtype=float)
    if not (x.shape == v.shape == pbest.shape) or gbest.shape[-1:] != x.shape[-1:]:
        raise ValueError(
            f"dimension mismatch: x{x.shape} v{v.shape} pbest{pbest.shape} gbest{gbest.shape}"
        )
    u = rng.random(x.shape + (2,))
    return w * v + iw * u[..., 0] * (pbest - x) + sw * u[..., 1] * (gbest - x)


def clamp_velocity(v, v_max) -> np.ndarray:
    """Clip every component into ``[-v_max, v_max]``; in-range values are untouched."""
    v_max = np.asarray(v_max, dtype=float)
    return np.clip(v, -v_max, v_max)


def update_position(x, v) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape != v.shape:
        raise ValueError(f"dimension mismatch: x{x.shape} v{v.shape}")
    return x + v


def constriction_factor(aw: float, kappa: float = 1.0) -> float:
    """Clerc's constriction factor for acceleration weight ``aw``."""
    if not 0.0 < kappa <= 1.0:
        raise ValueError(f"kappa must lie in (0, 1], got {kappa}")
    if aw >= 4.0:
        return 2.0 * kappa / (aw - 2.0 + math.sqrt(aw * aw - 4.0 * aw))
    return math.sqrt(kappa)


def constricted_parameter_set(aw: float, kappa: float = 1.0, v_max=None) -> ParameterSet:
    """Inertia-form weights equivalent to the constricted update.

    The acceleration weight is split equally, so ``w = chi`` and
    ``iw = sw = chi * aw / 2``.
    """
    chi = constriction_factor(aw, kappa)
    return ParameterSet(w=chi, iw=chi * aw / 2.0, sw=chi * aw / 2.0, v_max=v_max)


# Quartic through the (aw, w) pairs favouring fast clustering.
_POLY = (-4.142, 12.398, -12.77, 7.803, 2.0)


def polynomial_acceleration(w):
    """Acceleration weight ``iw + sw`` related to inertia ``w`` by the quartic fit."""
    return (((_POLY[0] * w + _POLY[1]) * w + _POLY[2]) * w + _POLY[3]) * w + _POLY[4]


WEIGHT_MODES = ("stochastic", "mean", "removed")


@dataclass(frozen=True)
class TrajectoryStudyConfig:
    """One-dimensional particle attracted to a fixed point ``p``.

    ``v0`` is either a number or a ``(low, high)`` pair meaning a uniform
    random draw in that interval (taken before any update draw).
    ``weight_mode``: ``stochastic`` uses U(0,1) draws, ``mean`` replaces them by
    0.5 and ``removed`` by 1.
    """

    x0: float = 100.0
    v0: Union[float, Tuple[float, float]] = 0.0
    p: float = 0.0
    weight_mode: str = "stochastic"
    w: float = 1.0
    iw: float = 2.0
    sw: float = 2.0
    v_max: Optional[float] = None
    steps: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}, got {self.weight_mode!r}")
        if self.v_max is not None and self.v_max <= 0:
            raise ValueError("v_max must be positive")


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    v: np.ndarray

    def __len__(self):
        return len(self.t)


def simulate_single_particle(config: TrajectoryStudyConfig) -> Trajectory:
    """Fly one particle for ``config.steps`` steps; the result includes t=0."""
    rng = np.random.default_rng(config.seed)
    if isinstance(config.v0, tuple):
        lo, hi = config.v0
        v0 = lo + (hi - lo) * rng.random()
    else:
        v0 = float(config.v0)
    if config.weight_mode == "mean":
        rng = PinnedDraws(0.5)
    elif config.weight_mode == "removed":
        rng = PinnedDraws(1.0)

    xs = np.empty(config.steps + 1)
    vs = np.empty(config.steps + 1)
    xs[0], vs[0] = config.x0, v0
    x = np.array([config.x0], dtype=float)
    v = np.array([v0], dtype=float)
    p = np.array([config.p], dtype=float)
    # Divergent settings overflow to inf by design.
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, config.steps + 1):
            v = update_velocity(x, v, p, p, config.w, config.iw, config.sw, rng)
            if config.v_max is not None:
                v = clamp_velocity(v, config.v_max)
            x = update_position(x, v)
            xs[t], vs[t] = x[0], v[0]
    return Trajectory(t=np.arange(config.steps + 1), x=xs, v=vs)
