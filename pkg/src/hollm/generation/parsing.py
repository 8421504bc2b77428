"""Extraction of JSON candidate lists from free-form model output."""

from __future__ import annotations

import json
import math
from typing import Any, Iterator, Sequence


class UnparseableResponse(ValueError):
    pass


_decoder = json.JSONDecoder()


def _json_arrays(text: str) -> Iterator[list]:
    """Every JSON array that decodes starting at a ``[`` in ``text``, in order."""
    pos = text.find("[")
    while pos != -1:
        try:
            obj, end = _decoder.raw_decode(text, pos)
        except ValueError:
            pos = text.find("[", pos + 1)
            continue
        if isinstance(obj, list):
            yield obj
        pos = text.find("[", end)


def _number(value: Any) -> float | None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def _candidate(element: Any, d: int, expect_value: bool, value_keys: Sequence[str]) -> tuple[tuple[float, ...], float | None] | None:
    if not isinstance(element, dict):
        return None
    coords = []
    for j in range(d):
        v = _number(element.get(f"x{j + 1}"))
        if v is None:
            return None
        coords.append(v)
    predicted = None
    if expect_value:
        predicted = next((_number(element[key]) for key in value_keys if key in element), None)
        if predicted is None:
            return None
    return tuple(coords), predicted


def parse_json_candidates(
    response_text: str,
    d: int,
    expect_value: bool = False,
    value_keys: Sequence[str] = ("value",),
) -> list[tuple[tuple[float, ...], float | None]]:
    """Points (and predicted values if ``expect_value``) from a model response.

    The first JSON array holding at least one well-formed element is used;
    prose and code fences around it are ignored and malformed elements are
    dropped.
    """
    for array in _json_arrays(response_text):
        parsed = [c for c in (_candidate(el, d, expect_value, value_keys) for el in array) if c is not None]
        if parsed:
            return parsed
    raise UnparseableResponse("unparseable response")


def parse_predictions(response_text: str, n: int, value_keys: Sequence[str] = ("loss", "value")) -> list[float]:
    """``n`` predicted values, in candidate order, from a prediction response."""
    for array in _json_arrays(response_text):
        values = []
        for el in array:
            if isinstance(el, dict):
                v = next((_number(el[key]) for key in value_keys if key in el), None)
            else:
                v = _number(el)
            if v is None:
                break
            values.append(v)
        else:
            if len(values) >= n:
                return values[:n]
    raise UnparseableResponse("unparseable response")


def render_candidates(points: Sequence[Sequence[float]], values: Sequence[float] | None = None) -> str:
    """Serialize points the way a well-behaved model would answer (used for fixtures)."""
    records = []
    for i, p in enumerate(points):
        rec: dict[str, float] = {f"x{j + 1}": float(v) for j, v in enumerate(p)}
        if values is not None:
            rec["value"] = float(values[i])
        records.append(rec)
    return json.dumps(records)
