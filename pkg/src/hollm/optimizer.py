"""Optimization loops: HOLLM, the global-LLM baseline, and random search.

All runners spend exactly ``config.T`` objective evaluations; LLM calls are
not counted.  The last batch is truncated to the remaining budget.
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import IO, Sequence

import numpy as np

from .core import History, ObjectiveFunction, RunConfig, SearchSpace, init_random, rng_stream
from .generation import CandidateGenerator, CandidateProposal, GeneratorSpec, make_generator, select_top_b
from .llm_client import ChatClient
from .partition import build_partition, max_leaf_size
from .scoring import composite_scores, cosine_alpha
from .selection import leaf_probabilities, sample_without_replacement

logger = logging.getLogger(__name__)

TRAJECTORY_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class TrajectoryRecord:
    t: int
    point: tuple[float, ...]
    raw_value: float
    value: float  # internal (maximized) value
    best_value: float
    best_raw: float
    round: int
    region_index: int | None
    generator_tag: str
    alpha_t: float | None
    predicted_value: float | None

    def to_json(self) -> str:
        doc = {"schema_version": TRAJECTORY_SCHEMA_VERSION, **asdict(self)}
        doc["point"] = list(self.point)
        return json.dumps(doc, allow_nan=True)

    @classmethod
    def from_json(cls, line: str) -> "TrajectoryRecord":
        doc = json.loads(line)
        version = doc.pop("schema_version", None)
        if version != TRAJECTORY_SCHEMA_VERSION:
            raise ValueError(f"unsupported trajectory schema version {version!r}")
        doc["point"] = tuple(float(v) for v in doc["point"])
        return cls(**doc)


@dataclass
class RoundLog:
    round: int
    t: int
    leaf_count: int | None
    leaf_capacity: int | None
    alpha_t: float | None
    chosen: tuple[int, ...]
    probabilities: tuple[float, ...]
    proposals: list[CandidateProposal]
    context: np.ndarray  # points evaluated before this round


@dataclass
class Trajectory:
    method: str
    records: list[TrajectoryRecord] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    accounting: dict = field(default_factory=dict)
    rounds: list[RoundLog] = field(default_factory=list)
    status: str = "complete"

    def __len__(self) -> int:
        return len(self.records)

    @property
    def values(self) -> np.ndarray:
        return np.array([r.value for r in self.records])

    @property
    def best_values(self) -> np.ndarray:
        return np.array([r.best_value for r in self.records])

    @property
    def points(self) -> np.ndarray:
        return np.array([r.point for r in self.records])

    def records_jsonl(self) -> str:
        return "".join(r.to_json() + "\n" for r in self.records)

    def write_jsonl(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.records_jsonl(), encoding="utf-8")
        return path

    @classmethod
    def read_jsonl(cls, path: str | Path, method: str | None = None) -> "Trajectory":
        path = Path(path)
        records = [TrajectoryRecord.from_json(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]
        return cls(method=method or path.stem, records=records)

    def best(self) -> tuple[tuple[float, ...], float]:
        if not self.records:
            raise ValueError("empty trajectory")
        rec = max(self.records, key=lambda r: (r.value, -r.t))
        return rec.point, rec.value


class OptimizerAborted(RuntimeError):
    def __init__(self, message: str, trajectory: Trajectory) -> None:
        super().__init__(message)
        self.trajectory = trajectory


class _Recorder:
    """Evaluates points, keeps the history/trajectory in sync, and flushes per batch."""

    def __init__(self, objective: ObjectiveFunction, method: str, config: RunConfig, log_path: str | Path | None):
        self.objective = objective
        self.space: SearchSpace = objective.space()
        self.history = History(self.space)
        self.trajectory = Trajectory(method=method, config=config.to_dict())
        self._fh: IO[str] | None = None
        if log_path is not None:
            path = Path(log_path)
            path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = path.open("w", encoding="utf-8")
        self._started = time.perf_counter()

    def evaluate_batch(
        self,
        points: Sequence[Sequence[float]],
        *,
        round_idx: int,
        proposals: Sequence[CandidateProposal] | None = None,
        alpha_t: float | None = None,
        tag: str = "init",
    ) -> None:
        new = []
        for i, x in enumerate(points):
            x = tuple(float(v) for v in x)
            try:
                value = float(self.objective.evaluate(x))
            except Exception as exc:
                self.trajectory.status = "aborted"
                self._flush(new)
                self.close()
                raise OptimizerAborted(f"objective failed at t={self.history.t + 1}: {exc}", self.trajectory) from exc
            self.history.add(x, value)
            prev = self.trajectory.records[-1].best_value if self.trajectory.records else -np.inf
            best = max(prev, value)
            prop = proposals[i] if proposals is not None else None
            rec = TrajectoryRecord(
                t=self.history.t,
                point=x,
                raw_value=float(self.objective.to_raw(value)),
                value=value,
                best_value=best,
                best_raw=float(self.objective.to_raw(best)),
                round=round_idx,
                region_index=prop.region_index if prop is not None else None,
                generator_tag=prop.generator_tag if prop is not None else tag,
                alpha_t=alpha_t,
                predicted_value=prop.predicted_value if prop is not None else None,
            )
            self.trajectory.records.append(rec)
            new.append(rec)
        self._flush(new)

    def _flush(self, records: list[TrajectoryRecord]) -> None:
        if self._fh is not None and records:
            self._fh.write("".join(r.to_json() + "\n" for r in records))
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def finish(self, generator: CandidateGenerator | None = None) -> Trajectory:
        self.close()
        self.trajectory.accounting = {
            "wall_clock_s": round(time.perf_counter() - self._started, 6),
            "evaluations": self.history.t,
            "llm": generator.usage() if generator is not None else {},
        }
        return self.trajectory


def _as_generator(generator: GeneratorSpec | CandidateGenerator, client: ChatClient | None) -> CandidateGenerator:
    return generator if isinstance(generator, CandidateGenerator) else make_generator(generator, client)


def _initial_design(rec: _Recorder, config: RunConfig) -> None:
    rec.evaluate_batch(init_random(rec.space, config.n0, config.seed), round_idx=0)


def run_hollm(
    objective: ObjectiveFunction,
    config: RunConfig,
    generator: GeneratorSpec | CandidateGenerator,
    *,
    client: ChatClient | None = None,
    log_path: str | Path | None = None,
    workers: int = 1,
    method: str = "hollm",
) -> Trajectory:
    """Partition, score, select, sample and evaluate until the budget is spent."""
    gen = _as_generator(generator, client)
    rec = _Recorder(objective, method, config, log_path)
    space = rec.space
    m0 = config.leaf_size(space.dims)
    _initial_design(rec, config)
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    round_idx = 0
    try:
        while rec.history.t < config.T:
            round_idx += 1
            t = rec.history.t
            m_t = max_leaf_size(t, m0, config.leaf_growth)
            partition = build_partition(rec.history, space, m_t)
            alpha = cosine_alpha(t, config.T, config.alpha_min, config.alpha_max)
            scores = composite_scores(partition.leaves, rec.history, alpha, config)
            p = leaf_probabilities([s.B for s in scores])
            selection = sample_without_replacement(p, config.M, rng_stream(config.seed, "select", round_idx))

            def propose(slot: int) -> list[CandidateProposal]:
                leaf_idx = selection.chosen[slot]
                rng = rng_stream(config.seed, "generate", round_idx, slot)
                return gen.generate(partition.leaves[leaf_idx].region, rec.history, config.k, rng, region_index=leaf_idx)

            slots = range(len(selection.chosen))
            batches = list(pool.map(propose, slots)) if pool is not None else [propose(s) for s in slots]
            proposals = [prop for batch in batches for prop in batch]
            top = select_top_b(proposals, min(config.b, config.T - t))
            rec.trajectory.rounds.append(
                RoundLog(round_idx, t, partition.K, m_t, alpha, selection.chosen, selection.probabilities, proposals, rec.history.points())
            )
            rec.evaluate_batch([c.point for c in top], round_idx=round_idx, proposals=top, alpha_t=alpha)
    finally:
        if pool is not None:
            pool.shutdown()
    return rec.finish(gen)


def run_global_llm(
    objective: ObjectiveFunction,
    config: RunConfig,
    generator: GeneratorSpec | CandidateGenerator,
    *,
    client: ChatClient | None = None,
    log_path: str | Path | None = None,
    method: str = "global_llm",
) -> Trajectory:
    """Baseline that asks the generator for ``k * M`` points over the whole domain each round."""
    gen = _as_generator(generator, client)
    rec = _Recorder(objective, method, config, log_path)
    region = rec.space.as_region()
    n_props = config.k * config.M
    _initial_design(rec, config)
    round_idx = 0
    while rec.history.t < config.T:
        round_idx += 1
        t = rec.history.t
        rng = rng_stream(config.seed, "generate", round_idx, 0)
        proposals = gen.generate(region, rec.history, n_props, rng, region_index=0)
        top = select_top_b(proposals, min(config.b, config.T - t))
        rec.trajectory.rounds.append(RoundLog(round_idx, t, None, None, None, (0,), (1.0,), proposals, rec.history.points()))
        rec.evaluate_batch([c.point for c in top], round_idx=round_idx, proposals=top)
    return rec.finish(gen)


def run_random_search(
    objective: ObjectiveFunction,
    config: RunConfig,
    *,
    log_path: str | Path | None = None,
    method: str = "rs",
) -> Trajectory:
    """``T`` uniform points, evaluated in order.  The first ``n0`` match the other runners' initial design."""
    rec = _Recorder(objective, method, config, log_path)
    points = init_random(rec.space, config.T, config.seed)
    rec.evaluate_batch(points[: config.n0], round_idx=0)
    if config.T > config.n0:
        rec.evaluate_batch(points[config.n0 :], round_idx=1, tag="uniform_random")
    return rec.finish()


class NoisyObjective(ObjectiveFunction):
    """Adds independent ``N(0, sigma^2)`` noise to every evaluation."""

    def __init__(self, inner: ObjectiveFunction, sigma: float, rng: np.random.Generator) -> None:
        if sigma < 0:
            raise ValueError("sigma must be >= 0")
        self.inner = inner
        self.sigma = float(sigma)
        self.rng = rng
        self.name = f"{inner.name}+noise"

    def evaluate(self, point: Sequence[float]) -> float:
        value = self.inner.evaluate(point)
        if self.sigma == 0.0:
            return value
        return value + float(self.rng.normal(0.0, self.sigma))

    def space(self) -> SearchSpace:
        return self.inner.space()

    def known_optimum(self) -> float | None:
        return self.inner.known_optimum()

    def to_raw(self, value: float) -> float:
        return self.inner.to_raw(value)


def make_noisy(objective: ObjectiveFunction, sigma: float, rng: np.random.Generator | int) -> NoisyObjective:
    if not isinstance(rng, np.random.Generator):
        rng = rng_stream(int(rng), "noise")
    return NoisyObjective(objective, sigma, rng)
