import itertools
import math

import numpy as np
import pytest

from hollm.benchmarks import make_benchmark
from hollm.core import RunConfig
from hollm.generation import GeneratorSpec
from hollm.harness.metrics import (
    batch_icl_divergence,
    best_so_far,
    cumulative_regret,
    hausdorff_coverage,
    icl_divergence,
    mean_stderr,
    simple_regret,
    to_unit_cube,
)
from hollm.optimizer import run_hollm


def brute_icl(P, C):
    total = 0.0
    for p in P:
        total += min(math.sqrt(sum((a - b) ** 2 for a, b in zip(p, c))) for c in C)
    return total / len(P)


def test_regret_examples():
    assert simple_regret([1, 3, 2], 5).tolist() == [4, 2, 2]
    assert cumulative_regret([4, 3], 5).tolist() == [1, 3]
    assert best_so_far([2, 1, 4, 3]).tolist() == [2, 2, 4, 4]


def test_icl_divergence_examples():
    assert icl_divergence([[0, 0]], [[3, 4]]) == 5.0
    assert icl_divergence([[0, 0], [1, 1]], [[0, 0], [1, 1]]) == 0.0
    with pytest.raises(ValueError):
        icl_divergence([], [[0.0]])


def test_icl_divergence_matches_brute_force():
    rng = np.random.default_rng(0)
    for _ in range(200):
        d = int(rng.integers(1, 8))
        P = rng.normal(size=(int(rng.integers(1, 15)), d))
        C = rng.normal(size=(int(rng.integers(1, 15)), d))
        assert icl_divergence(P, C) == pytest.approx(brute_icl(P.tolist(), C.tolist()), abs=1e-12)


@pytest.mark.parametrize("d", [1, 2])
def test_hausdorff_center_point_sampling_only(d):
    est = hausdorff_coverage([[0.5] * d], mc_samples=2**16, include_vertices=False)
    assert abs(est - math.sqrt(d) / 2) <= 0.01
    assert est <= math.sqrt(d) / 2 + 1e-12


@pytest.mark.parametrize("d", [1, 3, 8])
def test_hausdorff_center_point_with_vertices(d):
    assert hausdorff_coverage([[0.5] * d], mc_samples=2**10) == pytest.approx(math.sqrt(d) / 2, abs=1e-12)


def test_hausdorff_sampling_lower_bound_high_d():
    # pure sampling underestimates the corner-attained sup as d grows
    est = hausdorff_coverage([[0.5] * 3], mc_samples=2**12, include_vertices=False)
    assert est < math.sqrt(3) / 2


def test_hausdorff_all_vertices():
    d = 2
    verts = list(itertools.product([0.0, 1.0], repeat=d))
    assert abs(hausdorff_coverage(verts, 2**14, include_vertices=False) - math.sqrt(d) / 2) <= 0.01


def test_hausdorff_decreases_with_more_points():
    rng = np.random.default_rng(1)
    pts = rng.random((64, 2))
    vals = [hausdorff_coverage(pts[:n], 2**12) for n in (1, 4, 16, 64)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_hausdorff_deterministic_and_nonpower_of_two():
    pts = [[0.2, 0.3], [0.8, 0.6]]
    assert hausdorff_coverage(pts, 1024, seed=3) == hausdorff_coverage(pts, 1024, seed=3)
    with pytest.raises(ValueError):
        hausdorff_coverage([], 16)


def test_to_unit_cube():
    assert to_unit_cube(np.array([[0.0, -5.0]]), [-1, -5], [1, 5]).tolist() == [[0.5, 0.0]]


def test_mean_stderr_hand_computed():
    mean, se = mean_stderr([1.0, 2.0, 4.0])
    assert mean == 7 / 3
    var = ((1 - 7 / 3) ** 2 + (2 - 7 / 3) ** 2 + (4 - 7 / 3) ** 2) / 2
    assert se == pytest.approx(math.sqrt(var / 3), abs=1e-15)
    assert math.isnan(mean_stderr([3.0])[1])
    with pytest.raises(ValueError):
        mean_stderr([])


def test_batch_icl_divergence_rows():
    traj = run_hollm(make_benchmark("hartmann3"), RunConfig(T=17), GeneratorSpec())
    rows = batch_icl_divergence(traj)
    assert [r["round"] for r in rows] == [1, 2, 3]
    assert [r["t"] for r in rows] == [9, 13, 17]
    first = [r.point for r in traj.records if r.round == 1]
    assert rows[0]["icl_divergence"] == pytest.approx(brute_icl(first, [r.point for r in traj.records[:5]]), abs=1e-12)
