"""Stochastic choice of the leaves that receive this round's proposals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class SelectionOutcome:
    chosen: tuple[int, ...]  # leaf indices in draw order
    probabilities: tuple[float, ...]


def leaf_probabilities(scores: Sequence[float]) -> np.ndarray:
    B = np.asarray(scores, dtype=float)
    if B.size == 0:
        raise ValueError("no scores")
    if np.any(B < 0) or not np.all(np.isfinite(B)):
        raise ValueError("scores must be finite and non-negative")
    total = B.sum()
    if total <= 0:
        raise ValueError("degenerate scores")
    return B / total


def sample_without_replacement(p: Sequence[float], M: int, rng: np.random.Generator) -> SelectionOutcome:
    """Draw ``min(M, K)`` distinct indices by successive renormalized categorical draws.

    If the remaining probability mass reaches zero before enough leaves have
    been drawn, the rest are drawn uniformly among the leftovers.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    probs = np.asarray(p, dtype=float)
    remaining = list(range(len(probs)))
    chosen: list[int] = []
    for _ in range(min(M, len(probs))):
        w = probs[remaining]
        total = w.sum()
        u = rng.random()
        if total > 0:
            cdf = np.cumsum(w) / total
            pos = int(np.searchsorted(cdf, u, side="right"))
            pos = min(pos, len(remaining) - 1)
        else:
            pos = int(u * len(remaining))
        chosen.append(remaining.pop(pos))
    return SelectionOutcome(chosen=tuple(chosen), probabilities=tuple(float(x) for x in probs))
