"""Domain types shared by every part of the optimizer.

Internally everything is *maximized*.  Benchmarks that are naturally
minimization problems are wrapped with :class:`NegatedObjective`, and the raw
benchmark value is recovered with :meth:`ObjectiveFunction.to_raw`.
"""

from __future__ import annotations

import math
import zlib
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, field
from typing import Iterator, Sequence

import numpy as np

SCORING_VARIANTS = ("ucbv", "ucb1", "exploit_only", "explore_only", "uniform")
VOLUME_SOURCES = ("cell", "point_bbox")


def rng_stream(seed: int, label: str, *keys: int) -> np.random.Generator:
    """Independent generator for one consumer of randomness.

    Streams are keyed by ``(seed, label, *keys)`` so that adding a new consumer
    (or a new round) never shifts the numbers seen by the others.
    """
    spawn_key = (zlib.crc32(label.encode("utf-8")),) + tuple(int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=spawn_key))


@dataclass(frozen=True)
class Region:
    """Axis-aligned box ``[lower, upper]`` (closed on both sides)."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        lo = tuple(float(v) for v in self.lower)
        hi = tuple(float(v) for v in self.upper)
        if len(lo) != len(hi) or not lo:
            raise ValueError("lower and upper must be non-empty and of equal length")
        if any(a > b for a, b in zip(lo, hi)):
            raise ValueError(f"region has lower > upper: {lo} / {hi}")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dims(self) -> int:
        return len(self.lower)

    @property
    def widths(self) -> np.ndarray:
        return np.asarray(self.upper) - np.asarray(self.lower)

    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, point: Sequence[float]) -> bool:
        x = np.asarray(point, dtype=float)
        if x.shape != (self.dims,):
            return False
        return bool(np.all(x >= np.asarray(self.lower)) and np.all(x <= np.asarray(self.upper)))

    def sample_uniform(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(np.asarray(self.lower), np.asarray(self.upper), size=(n, self.dims))


@dataclass(frozen=True)
class SearchSpace(Region):
    """The optimization domain.  Unlike a :class:`Region`, every side must be open."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if any(a >= b for a, b in zip(self.lower, self.upper)):
            raise ValueError("search space needs lower < upper in every dimension")

    @classmethod
    def box(cls, low: float, high: float, dims: int) -> "SearchSpace":
        return cls((low,) * dims, (high,) * dims)

    def as_region(self) -> Region:
        return Region(self.lower, self.upper)


@dataclass(frozen=True)
class Evaluation:
    point: tuple[float, ...]
    value: float
    index: int  # 1-based position in the history


class History:
    """Append-only record of evaluations.

    Points are validated against ``space`` on insert.  ``t`` is the number of
    evaluations so far.
    """

    def __init__(self, space: SearchSpace, evaluations: Sequence[Evaluation] = ()) -> None:
        self.space = space
        self._evals: list[Evaluation] = []
        for ev in evaluations:
            self.add(ev.point, ev.value)

    def add(self, point: Sequence[float], value: float) -> Evaluation:
        pt = tuple(float(v) for v in point)
        if not self.space.contains(pt):
            raise ValueError(f"point {pt} lies outside the search space")
        ev = Evaluation(point=pt, value=float(value), index=len(self._evals) + 1)
        self._evals.append(ev)
        return ev

    @property
    def t(self) -> int:
        return len(self._evals)

    def __len__(self) -> int:
        return len(self._evals)

    def __iter__(self) -> Iterator[Evaluation]:
        return iter(self._evals)

    def __getitem__(self, i: int) -> Evaluation:
        return self._evals[i]

    @property
    def evaluations(self) -> list[Evaluation]:
        return list(self._evals)

    def points(self) -> np.ndarray:
        if not self._evals:
            return np.empty((0, self.space.dims))
        return np.array([ev.point for ev in self._evals], dtype=float)

    def values(self) -> np.ndarray:
        return np.array([ev.value for ev in self._evals], dtype=float)

    def point_set(self) -> set[tuple[float, ...]]:
        return {ev.point for ev in self._evals}

    def best(self) -> tuple[tuple[float, ...], float]:
        return history_best(self)


def history_best(history: History | Sequence[Evaluation]) -> tuple[tuple[float, ...], float]:
    """Point and value of the best evaluation; ties go to the earliest one."""
    best: Evaluation | None = None
    for ev in history:
        if best is None or ev.value > best.value:
            best = ev
    if best is None:
        raise ValueError("empty history")
    return best.point, best.value


def init_random(space: SearchSpace, n0: int, seed: int) -> np.ndarray:
    """``n0`` points drawn uniformly from ``space`` (rows of the result)."""
    if n0 < 1:
        raise ValueError("n0 must be >= 1")
    return space.sample_uniform(n0, rng_stream(seed, "init"))


@dataclass
class RunConfig:
    """Hyperparameters of one optimization run.

    ``m0=None`` resolves to ``ceil(d / 2)`` once the dimension is known.
    ``leaf_growth`` is the lambda of the adaptive leaf size schedule.
    """

    T: int = 50
    n0: int = 5
    b: int = 4
    M: int = 5
    k: int = 5
    m0: int | None = None
    leaf_growth: float = 0.0
    alpha_max: float = 1.0
    alpha_min: float = 0.01
    beta1: float = 0.5
    beta2: float = 0.5
    c: float = 1.0
    epsilon: float = 1e-6
    sigma0_sq: float = 0.01
    seed: int = 0
    scoring_variant: str = "ucbv"
    volume_source: str = "cell"

    def __post_init__(self) -> None:
        if self.n0 < 1:
            raise ValueError("n0 must be >= 1")
        if self.T < self.n0:
            raise ValueError("budget T must be >= n0")
        if min(self.b, self.M, self.k) < 1:
            raise ValueError("b, M and k must be >= 1")
        if self.b > self.k * self.M:
            raise ValueError("batch size b cannot exceed k * M proposals")
        if self.m0 is not None and self.m0 < 1:
            raise ValueError("m0 must be >= 1")
        if self.leaf_growth < 0:
            raise ValueError("leaf_growth must be >= 0")
        if self.alpha_min > self.alpha_max:
            raise ValueError("alpha_min must not exceed alpha_max")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be > 0")
        if self.beta1 < 0 or self.beta2 < 0:
            raise ValueError("beta weights must be non-negative")
        if self.beta1 > 0 and self.beta2 > 0 and not math.isclose(self.beta1 + self.beta2, 1.0, abs_tol=1e-12):
            raise ValueError("beta1 + beta2 must equal 1")
        if self.scoring_variant not in SCORING_VARIANTS:
            raise ValueError(f"unknown scoring variant {self.scoring_variant!r}")
        if self.volume_source not in VOLUME_SOURCES:
            raise ValueError(f"unknown volume source {self.volume_source!r}")

    def leaf_size(self, dims: int) -> int:
        return self.m0 if self.m0 is not None else math.ceil(dims / 2)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        if "lambda" in data:
            data["leaf_growth"] = data.pop("lambda")
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown run config fields: {sorted(unknown)}")
        return cls(**data)


class ObjectiveFunction(ABC):
    """Black-box objective, maximized by the optimizers.

    ``to_raw`` maps an internal value back to the objective's native scale
    (used for logging); the default is the identity.
    """

    name: str = "objective"

    @abstractmethod
    def evaluate(self, point: Sequence[float]) -> float: ...

    @abstractmethod
    def space(self) -> SearchSpace: ...

    def known_optimum(self) -> float | None:
        return None

    def to_raw(self, value: float) -> float:
        return value

    def __call__(self, point: Sequence[float]) -> float:
        return self.evaluate(point)


class NegatedObjective(ObjectiveFunction):
    """Turns a minimization objective into a maximization one."""

    def __init__(self, inner: ObjectiveFunction) -> None:
        self.inner = inner
        self.name = inner.name

    def evaluate(self, point: Sequence[float]) -> float:
        return -self.inner.evaluate(point)

    def space(self) -> SearchSpace:
        return self.inner.space()

    def known_optimum(self) -> float | None:
        opt = self.inner.known_optimum()
        return None if opt is None else -opt

    def to_raw(self, value: float) -> float:
        return -self.inner.to_raw(value)


@dataclass
class FunctionObjective(ObjectiveFunction):
    """Adapter for a plain callable to be maximized over ``bounds``."""

    fn: object
    bounds: SearchSpace
    optimum: float | None = None
    name: str = field(default="function")

    def evaluate(self, point: Sequence[float]) -> float:
        return float(self.fn(np.asarray(point, dtype=float)))  # type: ignore[operator]

    def space(self) -> SearchSpace:
        return self.bounds

    def known_optimum(self) -> float | None:
        return self.optimum
