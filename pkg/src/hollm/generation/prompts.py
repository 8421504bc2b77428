"""Prompt rendering for candidate generation and value prediction.

Templates are plain text files with ``$placeholder`` fields and can be
overridden per call.  In the two-prompt mode the model is shown a *loss*
(the negated internal value, so lower is better); the combined prompt talks
about maximization and shows internal values directly.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from string import Template
from typing import Sequence

from ..core import Evaluation, History, Region

DECIMALS = 6
DEFAULT_CONTEXT_CAP = 100
DEFAULT_METRIC = "loss"
JSON_INSTRUCTION = "Return only the required JSON list output without additional text."


def load_template(name: str, override: str | Path | None = None) -> Template:
    if override is not None:
        return Template(Path(override).read_text(encoding="utf-8"))
    text = resources.files("hollm.generation").joinpath("templates", f"{name}.txt").read_text(encoding="utf-8")
    return Template(text)


def fmt(value: float) -> str:
    return f"{value:.{DECIMALS}f}"


def context_examples(history: History, n_ctx: int) -> list[Evaluation]:
    """The ``n_ctx`` most recent evaluations plus the global best, oldest first."""
    if n_ctx < 1:
        raise ValueError("context cap must be >= 1")
    if len(history) == 0:
        return []
    evals = history.evaluations
    chosen = evals[-n_ctx:]
    best_point, best_value = history.best()
    best = next(ev for ev in evals if ev.value == best_value and ev.point == best_point)
    if best.index < chosen[0].index:
        chosen = [best] + chosen
    return chosen


def _point_json(point: Sequence[float]) -> str:
    return "{" + ", ".join(f'"x{j + 1}": {fmt(v)}' for j, v in enumerate(point)) + "}"


def render_range_constraints(region: Region) -> str:
    lines = [f"  x{j + 1}: range(float([{fmt(lo)}, {fmt(hi)}]))" for j, (lo, hi) in enumerate(zip(region.lower, region.upper))]
    return "{\n" + ",\n".join(lines) + "\n}"


def render_bounding_box(region: Region) -> str:
    return "\n".join(
        f"   x{j + 1}_min: {fmt(lo)}, x{j + 1}_max: {fmt(hi)}" for j, (lo, hi) in enumerate(zip(region.lower, region.upper))
    )


def render_loss_examples(examples: Sequence[Evaluation], metric: str = DEFAULT_METRIC) -> str:
    if not examples:
        return "(no configurations have been evaluated yet)"
    return "\n".join(f"{_point_json(ev.point)}\n{metric}: {fmt(-ev.value)}" for ev in examples)


def render_value_examples(examples: Sequence[Evaluation]) -> str:
    records = [{**{f"x{j + 1}": round(v, DECIMALS) for j, v in enumerate(ev.point)}, "value": round(ev.value, DECIMALS)} for ev in examples]
    return json.dumps(records, indent=4)


def sampler_format(dims: int, with_value: bool = False) -> str:
    if with_value:
        fields = ", ".join(f'"x{j + 1}": float' for j in range(dims))
        return f'[{{{fields}, "value": float}}]'
    return "{" + ", ".join(f'"x{j + 1}": ?' for j in range(dims)) + "}"


def build_generation_prompt(
    history: History,
    region: Region,
    k: int,
    n_ctx: int = DEFAULT_CONTEXT_CAP,
    *,
    metric: str = DEFAULT_METRIC,
    template: str | Path | None = None,
) -> str:
    tpl = load_template("generation", template)
    return tpl.substitute(
        metrics=metric,
        region_constraints=render_range_constraints(region),
        Region_ICL_examples=render_loss_examples(context_examples(history, n_ctx), metric),
        target_number_of_candidates=k,
        candidate_sampler_response_format=sampler_format(region.dims),
    )


def build_prediction_prompt(
    history: History,
    candidates: Sequence[Sequence[float]],
    n_ctx: int = DEFAULT_CONTEXT_CAP,
    *,
    region: Region | None = None,
    metric: str = DEFAULT_METRIC,
    template: str | Path | None = None,
) -> str:
    if not candidates:
        raise ValueError("need at least one candidate to predict")
    tpl = load_template("prediction", template)
    targets = "\n".join(f"{i + 1}: {_point_json(p)}" for i, p in enumerate(candidates))
    constraints = render_range_constraints(region) if region is not None else "as given by the candidates"
    return tpl.substitute(
        metrics=metric,
        region_constraints=constraints,
        Region_ICL_examples=render_loss_examples(context_examples(history, n_ctx), metric),
        target_architectures=targets,
        surrogate_model_response_format=f'{{"{metric}": ?}}',
    )


def build_combined_prompt(
    history: History,
    region: Region,
    k: int,
    n_ctx: int = DEFAULT_CONTEXT_CAP,
    *,
    template: str | Path | None = None,
) -> str:
    tpl = load_template("combined", template)
    return tpl.substitute(
        target_number_of_candidates=k,
        dimension=region.dims,
        Region_ICL_examples=render_value_examples(context_examples(history, n_ctx)),
        region_constraints=render_bounding_box(region),
        candidate_sampler_response_format=sampler_format(region.dims, with_value=True),
    )
