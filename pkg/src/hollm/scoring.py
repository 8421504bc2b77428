"""Per-leaf scores: best shifted value, volume, and a variance-aware bonus.

The three components are min-max normalized across the leaves of the
current partition and combined as ``mu + alpha_t * (beta1 * V + beta2 * E)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import History, Region, RunConfig
from .partition import Leaf, point_bbox


@dataclass(frozen=True)
class ScoreBreakdown:
    mu: float
    sigma_sq: float
    V: float
    E: float
    mu_norm: float
    V_norm: float
    E_norm: float
    B: float
    n: int


def exploitation_mu(leaf_values: Sequence[float], f_min: float, epsilon: float) -> float:
    """Largest shifted value ``v - f_min + epsilon`` in a leaf.

    ``f_min`` is the minimum over the whole history, not just this leaf.
    """
    if len(leaf_values) == 0:
        raise ValueError("empty leaf has no exploitation value")
    return max(float(v) for v in leaf_values) - f_min + epsilon


def region_volume(region: Region) -> float:
    """Geometric mean of the side lengths; 0 if any side is degenerate."""
    widths = region.widths
    if np.any(widths <= 0):
        return 0.0
    # log-space keeps high-dimensional products from under/overflowing
    return float(math.exp(np.mean(np.log(widths))))


def ucbv_bonus(sigma_sq: float, n: int, t: int, K: int, c: float) -> float:
    if n < 1 or t < 1 or K < 1:
        raise ValueError("ucbv_bonus needs n, t, K >= 1")
    log_term = max(0.0, math.log(t / (K * n)))
    return math.sqrt(2.0 * sigma_sq * log_term / n) + c * log_term / n


def ucb1_bonus(n: int, t: int, c: float) -> float:
    if n < 1 or t < 1:
        raise ValueError("ucb1_bonus needs n, t >= 1")
    return c * math.sqrt(2.0 * math.log(t) / n)


def leaf_variance(values: Sequence[float], sigma0_sq: float = 0.01) -> float:
    """Unbiased variance, or ``sigma0_sq`` when fewer than two values exist."""
    if len(values) < 2:
        return sigma0_sq
    return float(np.var(np.asarray(values, dtype=float), ddof=1))


def cosine_alpha(t: float, T: float, alpha_min: float, alpha_max: float) -> float:
    if T <= 0:
        raise ValueError("T must be positive")
    return alpha_min + 0.5 * (alpha_max - alpha_min) * (1.0 + math.cos(math.pi * t / T))


def minmax_normalize(values: Sequence[float]) -> np.ndarray:
    """Scale to ``[0, 1]``; a constant input maps to all ones."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot normalize an empty list")
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.ones_like(arr)
    return np.clip((arr - lo) / (hi - lo), 0.0, 1.0)


def composite_scores(
    leaves: Sequence[Leaf],
    history: History,
    alpha_t: float,
    config: RunConfig,
) -> list[ScoreBreakdown]:
    if not leaves:
        raise ValueError("no leaves to score")
    values = history.values()
    t = history.t
    K = len(leaves)
    Y = values - values.min() + config.epsilon

    mus, sigmas, vols, bonuses = [], [], [], []
    for leaf in leaves:
        if leaf.n == 0:
            # empty cells get maximal exploration before normalization
            mus.append(0.0)
            sigmas.append(config.sigma0_sq)
            vols.append(1.0)
            bonuses.append(1.0)
            continue
        y = Y[list(leaf.indices)]
        mu = float(y.max())
        sigma_sq = leaf_variance(y, config.sigma0_sq)
        if config.volume_source == "point_bbox":
            vol = region_volume(point_bbox(history, leaf))
        else:
            vol = region_volume(leaf.region)
        if config.scoring_variant == "ucb1":
            bonus = ucb1_bonus(leaf.n, t, config.c)
        else:
            bonus = ucbv_bonus(sigma_sq, leaf.n, t, K, config.c)
        mus.append(mu)
        sigmas.append(sigma_sq)
        vols.append(vol)
        bonuses.append(bonus)

    mu_n = minmax_normalize(mus)
    V_n = minmax_normalize(vols)
    E_n = minmax_normalize(bonuses)

    explore = alpha_t * (config.beta1 * V_n + config.beta2 * E_n)
    variant = config.scoring_variant
    if variant == "exploit_only":
        B = mu_n
    elif variant == "explore_only":
        B = explore
    elif variant == "uniform":
        B = np.ones(K)
    else:
        B = mu_n + explore

    return [
        ScoreBreakdown(
            mu=mus[i],
            sigma_sq=sigmas[i],
            V=vols[i],
            E=bonuses[i],
            mu_norm=float(mu_n[i]),
            V_norm=float(V_n[i]),
            E_norm=float(E_n[i]),
            B=float(B[i]),
            n=leaves[i].n,
        )
        for i in range(K)
    ]
