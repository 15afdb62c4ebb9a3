"""Benchmark test suite and the objective ("conflict") contract.

Every objective evaluates a single point of shape ``(n,)`` through ``__call__``
and a block of points of shape ``(m, n)`` through ``evaluate_batch``. Bounds
are exposed as per-dimension arrays ``lower``/``upper``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ObjectiveError",
    "ObjectiveSpec",
    "UserObjective",
    "FUNCTIONS",
    "BENCHMARKS",
    "benchmark_spec",
    "evaluate",
    "sphere",
    "rosenbrock",
    "rastrigin",
    "griewank",
    "schaffer_f6",
]


class ObjectiveError(ValueError):
    """Bad objective input: wrong dimension, non-finite point or unknown id."""


def sphere(x):
    return np.sum(x * x, axis=-1)


def rosenbrock(x):
    head, tail = x[..., :-1], x[..., 1:]
    return np.sum(100.0 * (tail - head * head) ** 2 + (head - 1.0) ** 2, axis=-1)


def rastrigin(x):
    return np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x) + 10.0, axis=-1)


def griewank(x):
    idx = np.sqrt(np.arange(1, x.shape[-1] + 1, dtype=float))
    return np.sum(x * x, axis=-1) / 4000.0 - np.prod(np.cos(x / idx), axis=-1) + 1.0


def schaffer_f6(x):
    r2 = np.sum(x * x, axis=-1)
    return (np.sin(np.sqrt(r2)) ** 2 - 0.5) / (1.0 + 0.001 * r2) ** 2 + 0.5


FUNCTIONS = {
    "sphere": sphere,
    "rosenbrock": rosenbrock,
    "rastrigin": rastrigin,
    "griewank": griewank,
    "schaffer_f6_2d": schaffer_f6,
    "schaffer_f6": schaffer_f6,
}

# id -> (dimension, lower, upper, acceptable absolute error)
BENCHMARKS = {
    "sphere": (30, -100.0, 100.0, 0.01),
    "rosenbrock": (30, -30.0, 30.0, 100.0),
    "rastrigin": (30, -5.12, 5.12, 100.0),
    "griewank": (30, -600.0, 600.0, 0.1),
    "schaffer_f6_2d": (2, -100.0, 100.0, 1e-5),
    "schaffer_f6": (30, -100.0, 100.0, 0.1),
}


def _check_points(x, n: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (n,):
        raise ObjectiveError(f"expected points of dimension {n}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ObjectiveError("non-finite coordinates in objective input")
    return x


@dataclass(frozen=True)
class ObjectiveSpec:
    """One benchmark function on a hyper-cube ``[search_lo, search_hi]^n``."""

    function_id: str
    dimension: int
    search_lo: float
    search_hi: float
    acceptable_error: float

    def __post_init__(self):
        if self.function_id not in FUNCTIONS:
            raise ObjectiveError(f"unknown function id {self.function_id!r}")
        if self.dimension < 1:
            raise ObjectiveError("dimension must be positive")
        if self.function_id == "rosenbrock" and self.dimension < 2:
            raise ObjectiveError("rosenbrock needs at least 2 dimensions")
        if self.function_id == "schaffer_f6_2d" and self.dimension != 2:
            raise ObjectiveError("schaffer_f6_2d is defined for n=2 only")
        if not self.search_lo < self.search_hi:
            raise ObjectiveError("search_lo must be below search_hi")
        if self.acceptable_error <= 0:
            raise ObjectiveError("acceptable_error must be positive")

    @property
    def name(self) -> str:
        return self.function_id

    @property
    def lower(self) -> np.ndarray:
        return np.full(self.dimension, self.search_lo)

    @property
    def upper(self) -> np.ndarray:
        return np.full(self.dimension, self.search_hi)

    def __call__(self, x) -> float:
        return float(FUNCTIONS[self.function_id](_check_points(x, self.dimension)))

    def evaluate_batch(self, points) -> np.ndarray:
        return FUNCTIONS[self.function_id](_check_points(points, self.dimension))


@dataclass(frozen=True)
class UserObjective:
    """Arbitrary conflict function on a box.

    ``func`` takes one point ``(n,)`` and returns a float, or, with
    ``vectorized=True``, takes ``(m, n)`` and returns ``(m,)``.
    """

    func: Callable
    lower: np.ndarray
    upper: np.ndarray
    acceptable_error: Optional[float] = None
    vectorized: bool = False
    name: str = "user"
    dimension: int = field(init=False)

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ObjectiveError("lower and upper must be 1-d arrays of equal length")
        if not np.all(lower < upper):
            raise ObjectiveError("every lower bound must be below its upper bound")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "dimension", lower.size)

    def __call__(self, x) -> float:
        x = _check_points(x, self.dimension)
        if self.vectorized:
            return float(np.asarray(self.func(x[None, :]))[0])
        return float(self.func(x))

    def evaluate_batch(self, points) -> np.ndarray:
        points = _check_points(points, self.dimension)
        if self.vectorized:
            return np.asarray(self.func(points), dtype=float)
        return np.array([float(self.func(p)) for p in points])


def benchmark_spec(function_id: str, dimension: Optional[int] = None) -> ObjectiveSpec:
    """Test-suite entry for ``function_id``; ``dimension`` overrides the default n."""
    try:
        n, lo, hi, err = BENCHMARKS[function_id]
    except KeyError:
        raise ObjectiveError(
            f"unknown function id {function_id!r}; choose from {sorted(BENCHMARKS)}"
        ) from None
    return ObjectiveSpec(function_id, n if dimension is None else dimension, lo, hi, err)


def evaluate(spec, x) -> float:
    return spec(x)
