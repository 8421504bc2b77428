"""Synthetic test functions with known minima.

The functions are defined for minimization; :func:`make_benchmark` wraps them
so the optimizers see a maximization problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import NegatedObjective, ObjectiveFunction, SearchSpace

# Hartmann constants (Dixon & Szego tables as commonly published)
_H_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
_H3_A = np.array([[3.0, 10.0, 30.0], [0.1, 10.0, 35.0], [3.0, 10.0, 30.0], [0.1, 10.0, 35.0]])
_H3_P = 1e-4 * np.array([[3689, 1170, 2673], [4699, 4387, 7470], [1091, 8732, 5547], [381, 5743, 8828]])
_H6_A = np.array(
    [
        [10.0, 3.0, 17.0, 3.5, 1.7, 8.0],
        [0.05, 10.0, 17.0, 0.1, 8.0, 14.0],
        [3.0, 3.5, 1.7, 10.0, 17.0, 8.0],
        [17.0, 8.0, 0.05, 10.0, 0.1, 14.0],
    ]
)
_H6_P = 1e-4 * np.array(
    [
        [1312, 1696, 5569, 124, 8283, 5886],
        [2329, 4135, 8307, 3736, 1004, 9991],
        [2348, 1451, 3522, 2883, 3047, 6650],
        [4047, 8828, 8732, 5743, 1091, 381],
    ]
)


def hartmann3(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    return float(-np.sum(_H_ALPHA * np.exp(-np.sum(_H3_A * (x - _H3_P) ** 2, axis=1))))


def hartmann6(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    return float(-np.sum(_H_ALPHA * np.exp(-np.sum(_H6_A * (x - _H6_P) ** 2, axis=1))))


def rosenbrock(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def rastrigin(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x**2 - 10.0 * np.cos(2.0 * np.pi * x)))


def levy(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    w = 1.0 + (x - 1.0) / 4.0
    head = np.sin(np.pi * w[0]) ** 2
    body = np.sum((w[:-1] - 1.0) ** 2 * (1.0 + 10.0 * np.sin(np.pi * w[:-1] + 1.0) ** 2))
    tail = (w[-1] - 1.0) ** 2 * (1.0 + np.sin(2.0 * np.pi * w[-1]) ** 2)
    return float(head + body + tail)


def ackley(x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    rms = np.sqrt(np.mean(x**2))
    return float(-20.0 * np.exp(-0.2 * rms) - np.exp(np.mean(np.cos(2.0 * np.pi * x))) + 20.0 + math.e)


def wave1d(x: Sequence[float]) -> float:
    """Multimodal 1-D demo curve for visual traces (no published optimum)."""
    v = float(np.asarray(x, dtype=float)[0])
    return -math.sin(3.0 * v) * math.exp(-0.1 * v * v) - 0.3 * math.cos(7.0 * v)


@dataclass(frozen=True)
class BenchmarkDef:
    name: str
    fn: Callable[[Sequence[float]], float]
    low: float
    high: float
    default_dims: int
    f_min: float | None
    minimizer: Callable[[int], np.ndarray] | None
    fixed_dims: bool = False
    tolerance: float = 1e-9


REGISTRY: dict[str, BenchmarkDef] = {
    "hartmann3": BenchmarkDef(
        "hartmann3", hartmann3, 0.0, 1.0, 3, -3.86278,
        lambda d: np.array([0.114614, 0.555649, 0.852547]), fixed_dims=True, tolerance=1e-4,
    ),
    "hartmann6": BenchmarkDef(
        "hartmann6", hartmann6, 0.0, 1.0, 6, -3.32237,
        lambda d: np.array([0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573]), fixed_dims=True, tolerance=1e-4,
    ),
    "rosenbrock": BenchmarkDef("rosenbrock", rosenbrock, -2.048, 2.048, 8, 0.0, lambda d: np.ones(d)),
    "rastrigin": BenchmarkDef("rastrigin", rastrigin, -5.12, 5.12, 10, 0.0, lambda d: np.zeros(d)),
    "levy": BenchmarkDef("levy", levy, -10.0, 10.0, 10, 0.0, lambda d: np.ones(d)),
    "ackley": BenchmarkDef("ackley", ackley, -32.768, 32.768, 20, 0.0, lambda d: np.zeros(d)),
    "wave1d": BenchmarkDef("wave1d", wave1d, -5.0, 5.0, 1, None, None, fixed_dims=True),
}


class Benchmark(ObjectiveFunction):
    """A registered test function on its box, in its native (minimization) sense."""

    def __init__(self, definition: BenchmarkDef, dims: int | None = None) -> None:
        dims = definition.default_dims if dims is None else int(dims)
        if definition.fixed_dims and dims != definition.default_dims:
            raise ValueError(f"{definition.name} is only defined for d={definition.default_dims}")
        if dims < 1 or (definition.name == "rosenbrock" and dims < 2):
            raise ValueError(f"invalid dimension {dims} for {definition.name}")
        self.definition = definition
        self.dims = dims
        self.name = definition.name if definition.fixed_dims else f"{definition.name}{dims}"
        self._space = SearchSpace.box(definition.low, definition.high, dims)

    def space(self) -> SearchSpace:
        return self._space

    def evaluate(self, point: Sequence[float]) -> float:
        x = np.asarray(point, dtype=float)
        if x.shape != (self.dims,):
            raise ValueError(f"expected a {self.dims}-vector, got shape {x.shape}")
        if not self._space.contains(x):
            raise ValueError(f"point {x.tolist()} outside the {self.name} domain")
        return self.definition.fn(x)

    def known_optimum(self) -> float | None:
        return self.definition.f_min

    def minimizer(self) -> np.ndarray | None:
        return None if self.definition.minimizer is None else self.definition.minimizer(self.dims)


def parse_benchmark_name(spec: str) -> tuple[str, int | None]:
    """``"levy:d=10"`` -> ``("levy", 10)``; ``"hartmann3"`` -> ``("hartmann3", None)``."""
    name, _, opts = spec.partition(":")
    dims = None
    for opt in filter(None, opts.split(",")):
        key, _, value = opt.partition("=")
        if key.strip() != "d" or not value:
            raise ValueError(f"bad benchmark option {opt!r} in {spec!r}")
        dims = int(value)
    return name.strip().lower(), dims


def make_benchmark(spec: str, *, maximize: bool = True) -> ObjectiveFunction:
    name, dims = parse_benchmark_name(spec)
    if name not in REGISTRY:
        raise KeyError(f"unknown benchmark {name!r}; choose from {sorted(REGISTRY)}")
    bench = Benchmark(REGISTRY[name], dims)
    return NegatedObjective(bench) if maximize else bench
