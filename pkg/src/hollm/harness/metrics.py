"""Post-hoc analysis: regret curves, proposal diversity and space coverage."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from scipy.stats import qmc

from ..optimizer import Trajectory

HAUSDORFF_NOTE = (
    "sup over the cube estimated by the max nearest-point distance of scrambled Sobol probes "
    "(plus the cube's vertices for d <= 16); a lower bound on the true value"
)
MAX_VERTEX_DIMS = 16


def _values(trajectory: Trajectory | Iterable[float]) -> np.ndarray:
    if isinstance(trajectory, Trajectory):
        return trajectory.values
    return np.asarray(list(trajectory), dtype=float)


def best_so_far(trajectory: Trajectory | Iterable[float]) -> np.ndarray:
    return np.maximum.accumulate(_values(trajectory))


def simple_regret(trajectory: Trajectory | Iterable[float], f_star: float) -> np.ndarray:
    """``f_star - max_{i<=t} f(x_i)`` for every ``t`` (maximization)."""
    return f_star - best_so_far(trajectory)


def cumulative_regret(trajectory: Trajectory | Iterable[float], f_star: float) -> np.ndarray:
    return np.cumsum(f_star - _values(trajectory))


def icl_divergence(proposals: Sequence[Sequence[float]], context: Sequence[Sequence[float]]) -> float:
    """Mean distance from each proposal to its nearest in-context point."""
    P = np.atleast_2d(np.asarray(proposals, dtype=float))
    C = np.atleast_2d(np.asarray(context, dtype=float))
    if P.size == 0 or C.size == 0:
        raise ValueError("proposals and context must be non-empty")
    return float(cdist(P, C).min(axis=1).mean())


def hausdorff_coverage(
    points: Sequence[Sequence[float]], mc_samples: int = 2**16, seed: int = 0, include_vertices: bool = True
) -> float:
    """Estimate ``sup_{x in [0,1]^d} min_p ||x - p||`` for points inside the unit cube.

    The farthest location is often a corner of the cube, which random probes
    only approach; ``include_vertices`` adds the ``2^d`` corners as probes
    when ``d <= 16``.
    """
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0:
        raise ValueError("empty point set")
    d = P.shape[1]
    sampler = qmc.Sobol(d=d, scramble=True, seed=seed)
    m = int(np.log2(mc_samples))
    probes = sampler.random_base2(m) if 2**m == mc_samples else sampler.random(mc_samples)
    if include_vertices and d <= MAX_VERTEX_DIMS:
        corners = (np.arange(2**d)[:, None] >> np.arange(d)) & 1
        probes = np.vstack([probes, corners.astype(float)])
    dist, _ = cKDTree(P).query(probes, k=1)
    return float(dist.max())


def to_unit_cube(points: np.ndarray, lower: Sequence[float], upper: Sequence[float]) -> np.ndarray:
    lo, hi = np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)
    return (np.asarray(points, dtype=float) - lo) / (hi - lo)


def batch_icl_divergence(trajectory: Trajectory) -> list[dict]:
    """ICL divergence of each round's evaluated batch against everything evaluated before it."""
    rows = []
    records = trajectory.records
    rounds = sorted({r.round for r in records if r.round > 0})
    for rnd in rounds:
        batch = [r.point for r in records if r.round == rnd]
        context = [r.point for r in records if r.round < rnd]
        if batch and context:
            rows.append({"round": rnd, "t": max(r.t for r in records if r.round == rnd), "icl_divergence": icl_divergence(batch, context)})
    return rows


def mean_stderr(samples: Sequence[float]) -> tuple[float, float]:
    """Mean and standard error (sample std / sqrt(n)); stderr is NaN for n < 2."""
    xs = [float(v) for v in samples]
    n = len(xs)
    if n == 0:
        raise ValueError("no samples")
    mean = math.fsum(xs) / n
    if n < 2:
        return mean, float("nan")
    var = math.fsum((x - mean) ** 2 for x in xs) / (n - 1)
    return mean, math.sqrt(var) / math.sqrt(n)
