import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hollm.core import rng_stream
from hollm.selection import leaf_probabilities, sample_without_replacement


def test_leaf_probabilities():
    assert leaf_probabilities([1, 1, 2]).tolist() == [0.25, 0.25, 0.5]
    assert leaf_probabilities([5]).tolist() == [1.0]
    p = leaf_probabilities([1.0] * 7)
    assert np.allclose(p, 1 / 7, rtol=0, atol=1e-15)


@pytest.mark.parametrize("bad", [[0.0, 0.0], [1.0, -0.5], [], [np.inf, 1.0]])
def test_leaf_probabilities_errors(bad):
    with pytest.raises(ValueError):
        leaf_probabilities(bad)


def test_m_at_least_k_takes_everything():
    out = sample_without_replacement([0.2, 0.3, 0.5], 10, np.random.default_rng(0))
    assert sorted(out.chosen) == [0, 1, 2]


def test_dominant_leaf_first():
    rng = np.random.default_rng(1)
    p = [1 - 1e-9, 1e-9]
    assert all(sample_without_replacement(p, 1, rng).chosen == (0,) for _ in range(1000))


def test_zero_probability_leaves_drawn_last():
    out = sample_without_replacement([0.0, 1.0, 0.0], 3, np.random.default_rng(2))
    assert out.chosen[0] == 1 and sorted(out.chosen) == [0, 1, 2]


def test_first_draw_frequencies():
    p = np.array([0.25, 0.25, 0.5])
    rng = np.random.default_rng(1234)
    counts = np.zeros(3)
    for _ in range(100_000):
        counts[sample_without_replacement(p, 1, rng).chosen[0]] += 1
    assert np.all(np.abs(counts / counts.sum() - p) <= 0.01)


def test_second_draw_law():
    # after drawing index 2 (p=0.5) the remaining two are equally likely
    p = [0.25, 0.25, 0.5]
    rng = np.random.default_rng(3)
    seconds = [o.chosen[1] for o in (sample_without_replacement(p, 2, rng) for _ in range(20_000)) if o.chosen[0] == 2]
    assert abs(np.mean(np.array(seconds) == 0) - 0.5) < 0.02


def test_deterministic_given_stream():
    p = [0.1, 0.2, 0.3, 0.4]
    a = sample_without_replacement(p, 3, rng_stream(5, "select", 1))
    b = sample_without_replacement(p, 3, rng_stream(5, "select", 1))
    assert a == b


@settings(max_examples=200, deadline=None)
@given(
    weights=st.lists(st.floats(1e-6, 10.0), min_size=1, max_size=40),
    M=st.integers(1, 50),
    seed=st.integers(0, 2**31),
)
def test_outcome_shape(weights, M, seed):
    p = leaf_probabilities(weights)
    out = sample_without_replacement(p, M, np.random.default_rng(seed))
    assert len(out.chosen) == min(M, len(p))
    assert len(set(out.chosen)) == len(out.chosen)
    assert abs(sum(out.probabilities) - 1.0) <= 1e-12
    assert all(x > 0 for x in out.probabilities)
