"""Candidate generators: LLM-backed, uniform random, and a scripted replay."""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ..core import History, Region
from ..llm_client import ChatClient, LlmError, LlmRequest
from .parsing import UnparseableResponse, parse_json_candidates, parse_predictions
from .prompts import (
    DEFAULT_CONTEXT_CAP,
    DEFAULT_METRIC,
    build_combined_prompt,
    build_generation_prompt,
    build_prediction_prompt,
)

logger = logging.getLogger(__name__)

GENERATOR_KINDS = ("llm", "uniform_random", "scripted_mock")
PROMPT_MODES = ("two_prompt", "combined")


@dataclass(frozen=True)
class CandidateProposal:
    point: tuple[float, ...]
    predicted_value: float
    region_index: int = 0
    generator_tag: str = ""
    order: int = 0  # position within its region's batch


@dataclass
class GeneratorSpec:
    kind: str = "uniform_random"
    model: str = "gemini-2.0-flash"
    temperature: float = 0.7
    max_tokens: int = 2048
    max_retries: int = 2
    context_cap: int = DEFAULT_CONTEXT_CAP
    prompt_mode: str = "two_prompt"
    metric: str = DEFAULT_METRIC
    script: list = field(default_factory=list)  # scripted_mock: one list of {x1.., value} per call
    templates: dict = field(default_factory=dict)  # optional overrides: generation / prediction / combined

    def __post_init__(self) -> None:
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.prompt_mode not in PROMPT_MODES:
            raise ValueError(f"unknown prompt mode {self.prompt_mode!r}")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if self.context_cap < 1:
            raise ValueError("context_cap must be >= 1")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "model": self.model,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "max_retries": self.max_retries,
            "context_cap": self.context_cap,
            "prompt_mode": self.prompt_mode,
            "metric": self.metric,
        }


def fallback_proposals(region: Region, n: int, rng: np.random.Generator, start: int = 0) -> list[CandidateProposal]:
    pts = region.sample_uniform(n, rng) if n > 0 else np.empty((0, region.dims))
    return [
        CandidateProposal(point=tuple(float(v) for v in p), predicted_value=0.0, generator_tag="fallback", order=start + i)
        for i, p in enumerate(pts)
    ]


def validate_and_retry(
    proposals: Sequence[CandidateProposal],
    region: Region,
    k: int,
    retries: int,
    rng: np.random.Generator,
    *,
    history: History | None = None,
    reprompt: Callable[[int], Sequence[CandidateProposal]] | None = None,
) -> list[CandidateProposal]:
    """Keep in-region, never-seen proposals; re-ask for the shortfall, then backfill.

    Points outside ``region`` or exactly equal to an evaluated (or already
    kept) point are dropped.  ``reprompt(n)`` is called at most ``retries``
    times; a raise from it uses up the attempt.  Whatever is still missing is
    drawn uniformly in the region and tagged ``"fallback"``.
    """
    seen = history.point_set() if history is not None else set()
    kept: list[CandidateProposal] = []

    def absorb(batch: Sequence[CandidateProposal]) -> None:
        for prop in batch:
            if len(kept) == k:
                return
            if prop.point in seen or not region.contains(prop.point):
                continue
            seen.add(prop.point)
            kept.append(replace(prop, order=len(kept)))

    absorb(proposals)
    attempts = 0
    while reprompt is not None and len(kept) < k and attempts < retries:
        attempts += 1
        try:
            absorb(reprompt(k - len(kept)))
        except (UnparseableResponse, LlmError) as exc:
            logger.info("re-prompt %d/%d failed: %s", attempts, retries, exc)
    if len(kept) < k:
        logger.warning("filling %d of %d proposals by uniform sampling", k - len(kept), k)
        kept.extend(fallback_proposals(region, k - len(kept), rng, start=len(kept)))
    return kept


class CandidateGenerator(ABC):
    tag = "generator"

    @abstractmethod
    def generate(
        self, region: Region, history: History, k: int, rng: np.random.Generator, *, region_index: int = 0
    ) -> list[CandidateProposal]:
        """Exactly ``k`` proposals inside ``region``."""

    def usage(self) -> dict:
        return {}


class UniformRandomGenerator(CandidateGenerator):
    tag = "uniform_random"

    def generate(self, region, history, k, rng, *, region_index=0):
        pts = region.sample_uniform(k, rng)
        return [
            CandidateProposal(tuple(float(v) for v in p), 0.0, region_index, self.tag, i) for i, p in enumerate(pts)
        ]


class ScriptedMockGenerator(CandidateGenerator):
    """Replays a fixed list of proposal batches, one batch per call."""

    tag = "scripted_mock"

    def __init__(self, script: Sequence[Sequence[dict]], cycle: bool = True) -> None:
        if not script:
            raise ValueError("scripted generator needs at least one batch")
        self.script = [list(batch) for batch in script]
        self.cycle = cycle
        self.calls = 0

    def generate(self, region, history, k, rng, *, region_index=0):
        if self.calls >= len(self.script) and not self.cycle:
            batch: list[dict] = []
        else:
            batch = self.script[self.calls % len(self.script)]
        self.calls += 1
        props = []
        for i, rec in enumerate(batch):
            point = tuple(float(rec[f"x{j + 1}"]) for j in range(region.dims))
            props.append(CandidateProposal(point, float(rec.get("value", 0.0)), region_index, self.tag, i))
        kept = validate_and_retry(props, region, k, 0, rng, history=history)
        return [replace(p, region_index=region_index) for p in kept]


class LlmGenerator(CandidateGenerator):
    """Proposes points with one prompt and scores them with a second one
    (or does both at once in ``combined`` mode)."""

    tag = "llm"

    def __init__(self, client: ChatClient, spec: GeneratorSpec) -> None:
        self.client = client
        self.spec = spec

    def _ask(self, prompt: str) -> str:
        request = LlmRequest.from_prompt(prompt, self.spec.model, self.spec.temperature, self.spec.max_tokens)
        return self.client.chat_complete(request).text

    def usage(self) -> dict:
        return self.client.usage.snapshot()

    def generate(self, region, history, k, rng, *, region_index=0):
        spec = self.spec
        combined = spec.prompt_mode == "combined"

        def propose(n: int) -> list[CandidateProposal]:
            if combined:
                prompt = build_combined_prompt(history, region, n, spec.context_cap, template=spec.templates.get("combined"))
            else:
                prompt = build_generation_prompt(
                    history, region, n, spec.context_cap, metric=spec.metric, template=spec.templates.get("generation")
                )
            parsed = parse_json_candidates(self._ask(prompt), region.dims, expect_value=combined)
            return [
                CandidateProposal(pt, value if value is not None else 0.0, region_index, self.tag, i)
                for i, (pt, value) in enumerate(parsed)
            ]

        try:
            first = propose(k)
        except (UnparseableResponse, LlmError) as exc:
            logger.info("generation call failed: %s", exc)
            first = []
        kept = validate_and_retry(first, region, k, spec.max_retries, rng, history=history, reprompt=propose)
        kept = [replace(p, region_index=region_index) for p in kept]
        if combined:
            return kept
        predicted = self._predict(history, region, [p.point for p in kept])
        return [replace(p, predicted_value=v) for p, v in zip(kept, predicted)]

    def _predict(self, history: History, region: Region, points: list[tuple[float, ...]]) -> list[float]:
        spec = self.spec
        prompt = build_prediction_prompt(
            history, points, spec.context_cap, region=region, metric=spec.metric, template=spec.templates.get("prediction")
        )
        for attempt in range(spec.max_retries + 1):
            try:
                losses = parse_predictions(self._ask(prompt), len(points), value_keys=(spec.metric, "value"))
            except (UnparseableResponse, LlmError) as exc:
                logger.info("prediction call %d failed: %s", attempt + 1, exc)
                continue
            # the model predicts a loss; internal values are maximized
            return [-v for v in losses]
        logger.warning("prediction failed after %d attempts; using 0 for all candidates", spec.max_retries + 1)
        return [0.0] * len(points)


def make_generator(spec: GeneratorSpec, client: ChatClient | None = None) -> CandidateGenerator:
    if spec.kind == "uniform_random":
        return UniformRandomGenerator()
    if spec.kind == "scripted_mock":
        return ScriptedMockGenerator(spec.script)
    if client is None:
        raise ValueError("the llm generator needs a chat client")
    return LlmGenerator(client, spec)


def generate(
    region: Region,
    history: History,
    k: int,
    spec: GeneratorSpec | CandidateGenerator,
    rng: np.random.Generator,
    *,
    client: ChatClient | None = None,
    region_index: int = 0,
) -> list[CandidateProposal]:
    gen = spec if isinstance(spec, CandidateGenerator) else make_generator(spec, client)
    if k < 1:
        raise ValueError("k must be >= 1")
    return gen.generate(region, history, k, rng, region_index=region_index)


def select_top_b(all_proposals: Sequence[CandidateProposal], b: int) -> list[CandidateProposal]:
    """The ``b`` highest predictions.

    Ties go round-robin over regions: first by position within the region's
    batch, then by merge order (selection draw order), so equal predictions
    spread the batch across the chosen leaves.
    """
    ranked = sorted(
        range(len(all_proposals)),
        key=lambda i: (-all_proposals[i].predicted_value, all_proposals[i].order, i),
    )
    return [all_proposals[i] for i in ranked[:b]]
