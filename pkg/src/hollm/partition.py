"""KD-tree partitioning of the search space, rebuilt from scratch each round.

Each internal node splits on the dimension of largest sample variance at the
mean coordinate; points with ``x[dim] <= value`` go left.  Leaves carry the
split-derived cells, so together they tile the whole domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import History, Region, SearchSpace


def max_leaf_size(t: int, m0: int, growth: float) -> int:
    """Leaf capacity ``m0 + ceil(growth * ln(1 + t))``."""
    if t < 0 or m0 < 1 or growth < 0:
        raise ValueError("need t >= 0, m0 >= 1, growth >= 0")
    return m0 + math.ceil(growth * math.log1p(t))


def choose_split(points: np.ndarray) -> tuple[int, float] | None:
    """Pick ``(dim, value)`` for a node, or ``None`` if no split separates the points.

    Dimensions are tried in decreasing variance order (ties to the lowest
    index); the first whose mean split leaves at least one point on each side
    wins.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 2:
        raise ValueError("cannot split fewer than 2 points")
    var = pts.var(axis=0)
    order = np.argsort(-var, kind="stable")
    for dim in order:
        if var[dim] <= 0.0:
            break
        value = float(pts[:, dim].mean())
        n_left = int(np.count_nonzero(pts[:, dim] <= value))
        if 0 < n_left < pts.shape[0]:
            return int(dim), value
    return None


@dataclass(frozen=True)
class Leaf:
    region: Region
    indices: tuple[int, ...]  # 0-based positions into the history
    degenerate: bool = False  # over capacity because no split separates its points

    @property
    def n(self) -> int:
        return len(self.indices)


@dataclass
class _Node:
    dim: int = -1
    value: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None
    leaf_id: int = -1


class Partition:
    """Leaves of one KD-tree build plus the split structure for point lookup."""

    def __init__(self, leaves: list[Leaf], root: _Node, round_t: int) -> None:
        self.leaves = leaves
        self._root = root
        self.round = round_t

    @property
    def K(self) -> int:
        return len(self.leaves)

    def __len__(self) -> int:
        return len(self.leaves)

    def __iter__(self):
        return iter(self.leaves)

    def locate(self, point: Sequence[float]) -> int:
        """Index of the leaf whose cell receives ``point`` under the split rule."""
        node = self._root
        while node.leaf_id < 0:
            node = node.left if point[node.dim] <= node.value else node.right  # type: ignore[assignment]
        return node.leaf_id

    def signature(self) -> list[tuple]:
        return [(leaf.region.lower, leaf.region.upper, leaf.indices, leaf.degenerate) for leaf in self.leaves]


def build_partition(history: History, space: SearchSpace, m_t: int) -> Partition:
    """Fit a KD-tree with leaf capacity ``m_t`` to every point in ``history``."""
    if len(history) == 0:
        raise ValueError("cannot partition an empty history")
    if m_t < 1:
        raise ValueError("leaf capacity must be >= 1")
    X = history.points()
    leaves: list[Leaf] = []
    root = _Node()
    # depth-first, left child before right, so leaf order is deterministic
    stack: list[tuple[_Node, np.ndarray, np.ndarray, np.ndarray]] = [
        (root, np.arange(len(X)), np.asarray(space.lower, dtype=float), np.asarray(space.upper, dtype=float))
    ]
    while stack:
        node, idx, lo, hi = stack.pop()
        split = choose_split(X[idx]) if len(idx) > m_t else None
        if split is None:
            node.leaf_id = len(leaves)
            leaves.append(
                Leaf(
                    region=Region(tuple(lo), tuple(hi)),
                    indices=tuple(int(i) for i in idx),
                    degenerate=len(idx) > m_t,
                )
            )
            continue
        dim, value = split
        mask = X[idx, dim] <= value
        node.dim, node.value = dim, value
        node.left, node.right = _Node(), _Node()
        left_hi = hi.copy()
        left_hi[dim] = value
        right_lo = lo.copy()
        right_lo[dim] = value
        stack.append((node.right, idx[~mask], right_lo, hi))
        stack.append((node.left, idx[mask], lo, left_hi))
    return Partition(leaves, root, history.t)


def point_bbox(history: History, leaf: Leaf) -> Region:
    """Bounding box of the points held by ``leaf`` (zero-width for a single point)."""
    if leaf.n == 0:
        return leaf.region
    pts = history.points()[list(leaf.indices)]
    return Region(tuple(pts.min(axis=0)), tuple(pts.max(axis=0)))
