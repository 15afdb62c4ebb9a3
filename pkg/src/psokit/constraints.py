"""Feasibility and the constraint-handling techniques.

Three modes are supported by the engine:

* ``cutoff``   clip positions onto the feasible box after each move;
* ``preserve`` let particles fly anywhere but never remember infeasible points;
* ``penalty``  add ``lambda * sum(violation**2)`` to the conflict, with
  ``lambda`` adapted every generation.

Constraint functions take one point ``(n,)`` and return a float; inequalities
mean ``g(x) <= 0``, equalities ``g(x) = 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "CONSTRAINT_MODES",
    "ConstraintSet",
    "InitializationError",
    "PenaltyState",
    "is_feasible",
    "feasible_mask",
    "cutoff_repair",
    "feasible_initialize",
    "violation_measures",
    "penalized_conflict",
    "update_lambda",
]

CONSTRAINT_MODES = ("none", "cutoff", "preserve", "penalty")


class InitializationError(RuntimeError):
    """Rejection sampling ran out of attempts before finding a feasible point."""


@dataclass(frozen=True)
class ConstraintSet:
    box: Optional[Tuple[np.ndarray, np.ndarray]] = None
    inequalities: Sequence[Callable] = ()
    equalities: Sequence[Callable] = ()
    tol: Optional[float] = None

    def __post_init__(self):
        if self.box is not None:
            lo = np.atleast_1d(np.asarray(self.box[0], dtype=float))
            hi = np.atleast_1d(np.asarray(self.box[1], dtype=float))
            if lo.shape != hi.shape or np.any(lo > hi):
                raise ValueError("box must be (lower, upper) with lower <= upper")
            object.__setattr__(self, "box", (lo, hi))
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        object.__setattr__(self, "equalities", tuple(self.equalities))
        if self.equalities and self.tol is None:
            raise ValueError("an explicit tol is required when equality constraints are present")
        if self.tol is not None and self.tol < 0:
            raise ValueError("tol must be non-negative")

    @property
    def is_empty(self) -> bool:
        return self.box is None and not self.inequalities and not self.equalities

    @property
    def box_only(self) -> bool:
        return not self.inequalities and not self.equalities

    def with_box(self, lower, upper) -> "ConstraintSet":
        """Copy with ``box`` filled in when unset."""
        if self.box is not None:
            return self
        return replace(self, box=(lower, upper))


def _tol(cs: ConstraintSet, tol: Optional[float]) -> float:
    if tol is not None:
        return tol
    return 0.0 if cs.tol is None else cs.tol


def is_feasible(x, cs: ConstraintSet, tol: Optional[float] = None) -> bool:
    """Box membership and ``g <= tol`` / ``|h| <= tol`` for every constraint."""
    x = np.asarray(x, dtype=float)
    tol = _tol(cs, tol)
    if cs.box is not None:
        lo, hi = cs.box
        if np.any(x < lo) or np.any(x > hi):
            return False
    if any(g(x) > tol for g in cs.inequalities):
        return False
    return all(abs(h(x)) <= tol for h in cs.equalities)


def feasible_mask(points, cs: ConstraintSet, tol: Optional[float] = None) -> np.ndarray:
    """Row-wise :func:`is_feasible` for an ``(m, n)`` block."""
    points = np.asarray(points, dtype=float)
    if cs.box is not None:
        lo, hi = cs.box
        mask = np.all((points >= lo) & (points <= hi), axis=-1)
    else:
        mask = np.ones(points.shape[0], dtype=bool)
    if cs.box_only:
        return mask
    for i in np.flatnonzero(mask):
        mask[i] = is_feasible(points[i], replace(cs, box=None), tol)
    return mask


def cutoff_repair(x, lower, upper) -> np.ndarray:
    """Clip each coordinate into ``[lower, upper]``; velocity is left alone."""
    return np.clip(x, lower, upper)


def feasible_initialize(rng, lower, upper, cs: ConstraintSet, max_attempts: int = 10_000):
    """Rejection-sample a feasible point uniformly from ``[lower, upper]``.

    Each attempt consumes ``n`` uniform draws from ``rng``. Returns the point
    and the number of attempts used.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    for attempt in range(1, max_attempts + 1):
        x = lower + (upper - lower) * rng.random(lower.shape)
        if is_feasible(x, cs):
            return x, attempt
    raise InitializationError(
        f"no feasible point found after {max_attempts} attempts; "
        "the feasible region may be too small for random initialization"
    )


def violation_measures(x, cs: ConstraintSet) -> np.ndarray:
    """Constraint violation vector.

    Box bounds, when present, contribute two inequality terms per dimension
    (``lower - x`` and ``x - upper``) ahead of the explicit inequalities.
    Inequalities give ``max(0, g)``; equalities give ``h`` with its sign.
    """
    x = np.asarray(x, dtype=float)
    parts = []
    if cs.box is not None:
        lo, hi = cs.box
        parts.append(np.maximum(0.0, lo - x))
        parts.append(np.maximum(0.0, x - hi))
    parts.append(np.array([max(0.0, float(g(x))) for g in cs.inequalities]))
    parts.append(np.array([float(h(x)) for h in cs.equalities]))
    return np.concatenate(parts)


def penalized_conflict(f_value, violations, lam: float):
    """``f + lam * sum(violations**2)``; ``violations`` may be ``(m_c,)`` or ``(m, m_c)``."""
    violations = np.asarray(violations, dtype=float)
    return f_value + lam * np.sum(violations * violations, axis=-1)


@dataclass(frozen=True)
class PenaltyState:
    """Adaptive penalty coefficient and the recent best-was-feasible flags.

    The defaults (``beta1=2``, ``beta2=3``, ``k=5``, ``lam=1``) are arbitrary;
    the method only asks for ``beta1, beta2 > 1`` and ``beta1 != beta2``.
    """

    lam: float = 1.0
    beta1: float = 2.0
    beta2: float = 3.0
    k: int = 5
    history: Tuple[bool, ...] = field(default=())

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.beta1 <= 1 or self.beta2 <= 1 or self.beta1 == self.beta2:
            raise ValueError("need beta1, beta2 > 1 and beta1 != beta2")
        if self.k < 1:
            raise ValueError("k must be a positive integer")


def update_lambda(state: PenaltyState, best_was_feasible: bool) -> PenaltyState:
    history = (state.history + (bool(best_was_feasible),))[-state.k:]
    lam = state.lam
    if len(history) == state.k:
        if all(history):
            lam = lam / state.beta1
        elif not any(history):
            lam = lam * state.beta2
    # Long all-feasible or all-infeasible streaks would under/overflow.
    lam = min(max(lam, _LAM_FLOOR), _LAM_CEIL)
    return replace(state, lam=lam, history=history)


_LAM_FLOOR = float(np.finfo(float).tiny)
_LAM_CEIL = float(np.finfo(float).max)
