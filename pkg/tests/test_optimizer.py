import json
import math

import numpy as np
import pytest

from hollm.benchmarks import make_benchmark
from hollm.core import FunctionObjective, RunConfig, SearchSpace
from hollm.generation import GeneratorSpec, ScriptedMockGenerator, UniformRandomGenerator
from hollm.llm_client import ReplayClient
from hollm.optimizer import (
    OptimizerAborted,
    Trajectory,
    TrajectoryRecord,
    make_noisy,
    run_global_llm,
    run_hollm,
    run_random_search,
)

from conftest import FIXTURES

UNIFORM = GeneratorSpec(kind="uniform_random")
IDENTITY_FIELDS = ("t", "point", "raw_value", "value", "best_value", "best_raw", "round", "generator_tag", "predicted_value")


def _key(traj):
    return [tuple(getattr(r, f) for f in IDENTITY_FIELDS) for r in traj.records]


def test_hollm_deterministic_and_exact_budget(tmp_path):
    f = make_benchmark("hartmann3")
    cfg = RunConfig(T=50, seed=3)
    a = run_hollm(f, cfg, UNIFORM, log_path=tmp_path / "a.jsonl")
    b = run_hollm(f, cfg, UNIFORM, log_path=tmp_path / "b.jsonl")
    assert len(a) == 50
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()
    assert np.all(np.diff(a.best_values) >= 0)
    assert a.records_jsonl() == (tmp_path / "a.jsonl").read_text()


def test_different_seeds_differ():
    f = make_benchmark("hartmann3")
    a = run_hollm(f, RunConfig(T=12, seed=0), UNIFORM)
    b = run_hollm(f, RunConfig(T=12, seed=1), UNIFORM)
    assert a.records_jsonl() != b.records_jsonl()


def test_budget_equal_to_init_has_no_rounds():
    f = make_benchmark("hartmann3")
    traj = run_hollm(f, RunConfig(T=5, n0=5, b=4), UNIFORM)
    assert len(traj) == 5 and traj.rounds == [] and {r.round for r in traj.records} == {0}


def test_last_batch_truncated():
    f = make_benchmark("hartmann3")
    traj = run_hollm(f, RunConfig(T=13, n0=5, b=4), UNIFORM)
    sizes = [sum(1 for r in traj.records if r.round == k) for k in range(4)]
    assert sizes == [5, 4, 4, 0] and len(traj) == 13
    traj = run_hollm(f, RunConfig(T=11, n0=5, b=4), UNIFORM)
    assert [sum(1 for r in traj.records if r.round == k) for k in range(3)] == [5, 4, 2]


def test_init_design_shared_across_methods():
    f = make_benchmark("levy:d=4")
    cfg = RunConfig(T=20, seed=7)
    firsts = [tuple(r.point for r in t.records[:5]) for t in (
        run_hollm(f, cfg, UNIFORM), run_global_llm(f, cfg, UNIFORM), run_random_search(f, cfg)
    )]
    assert firsts[0] == firsts[1] == firsts[2]


def test_round_logs_consistent():
    f = make_benchmark("rastrigin:d=2")
    cfg = RunConfig(T=30, n0=5, b=4, M=3, k=2)
    traj = run_hollm(f, cfg, UNIFORM)
    for log in traj.rounds:
        assert log.leaf_count >= 1 and len(log.chosen) == min(cfg.M, log.leaf_count)
        assert len(log.proposals) == cfg.k * len(log.chosen)
        assert len(log.context) == log.t
        assert 0 < log.alpha_t <= cfg.alpha_max


def test_reduction_identity_uniform():
    f = make_benchmark("hartmann3")
    cfg = RunConfig(T=30, M=1, k=6, b=3, m0=30, seed=11)
    h = run_hollm(f, cfg, UNIFORM)
    g = run_global_llm(f, cfg, UNIFORM)
    assert _key(h) == _key(g)
    assert all(log.leaf_count == 1 for log in h.rounds)


def test_reduction_identity_scripted():
    script = [[{"x1": 0.1 * i, "x2": 0.05 * j + 0.01 * i, "x3": 0.5, "value": float(i + j)} for j in range(4)] for i in range(1, 9)]
    f = make_benchmark("hartmann3")
    cfg = RunConfig(T=25, M=1, k=4, b=3, m0=25, seed=2)
    h = run_hollm(f, cfg, ScriptedMockGenerator(script))
    g = run_global_llm(f, cfg, ScriptedMockGenerator(script))
    assert _key(h) == _key(g)


def test_global_uniform_takes_first_b():
    f = make_benchmark("hartmann3")
    cfg = RunConfig(T=13, b=4, k=2, M=3)
    traj = run_global_llm(f, cfg, UNIFORM)
    for log in traj.rounds:
        batch = [r.point for r in traj.records if r.round == log.round]
        assert batch == [p.point for p in log.proposals[: len(batch)]]


def test_predictions_drive_batch():
    # scripted predictions: the top-b values are evaluated
    script = [[{"x1": 0.1 * i + 0.01 * j, "value": float(i)} for i in range(1, 6)] for j in range(5)]
    f = FunctionObjective(lambda x: -abs(x[0] - 0.3), SearchSpace.box(0, 1, 1))
    traj = run_global_llm(f, RunConfig(T=7, n0=5, b=2, k=5, M=1), ScriptedMockGenerator(script))
    assert [r.predicted_value for r in traj.records[5:]] == [5.0, 4.0]


def test_random_search_shape():
    f = make_benchmark("ackley:d=3")
    traj = run_random_search(f, RunConfig(T=40, seed=4))
    assert len(traj) == 40
    assert [r.generator_tag for r in traj.records[:6]] == ["init"] * 5 + ["uniform_random"]
    assert all(f.space().contains(r.point) for r in traj.records)


@pytest.mark.parametrize("name,d", [("rosenbrock", 2), ("rastrigin", 5), ("levy", 1), ("ackley", 20), ("hartmann6", None)])
@pytest.mark.parametrize("variant", ["ucbv", "ucb1", "exploit_only", "explore_only", "uniform"])
def test_smoke_all_variants(name, d, variant):
    spec = name if d is None else f"{name}:d={d}"
    f = make_benchmark(spec)
    traj = run_hollm(f, RunConfig(T=24, scoring_variant=variant, leaf_growth=0.5), UNIFORM)
    assert len(traj) == 24 and all(f.space().contains(r.point) for r in traj.records)
    assert np.all(np.diff(traj.best_values) >= 0)


def test_workers_match_serial():
    f = make_benchmark("levy:d=3")
    cfg = RunConfig(T=30)
    assert run_hollm(f, cfg, UNIFORM).records_jsonl() == run_hollm(f, cfg, UNIFORM, workers=4).records_jsonl()


def test_offline_llm_round():
    client = ReplayClient.from_dir(FIXTURES / "offline_run", cycle=True)
    f = make_benchmark("hartmann3")
    traj = run_hollm(f, RunConfig(T=9, n0=5, b=4), GeneratorSpec(kind="llm"), client=client)
    assert len(traj) == 9
    assert traj.accounting["llm"]["calls"] == len(client.requests) > 0
    assert {r.generator_tag for r in traj.records[5:]} <= {"llm", "fallback"}


def test_abort_persists_partial_log(tmp_path):
    calls = {"n": 0}

    def flaky(x):
        calls["n"] += 1
        if calls["n"] == 8:
            raise RuntimeError("simulator crashed")
        return -float(np.sum(np.square(x)))

    f = FunctionObjective(flaky, SearchSpace.box(-1, 1, 2))
    path = tmp_path / "run.jsonl"
    with pytest.raises(OptimizerAborted) as info:
        run_hollm(f, RunConfig(T=20), UNIFORM, log_path=path)
    assert info.value.trajectory.status == "aborted"
    assert len(Trajectory.read_jsonl(path)) == 7 == len(info.value.trajectory)


def test_jsonl_round_trip(tmp_path):
    traj = run_hollm(make_benchmark("hartmann3"), RunConfig(T=15), UNIFORM)
    back = Trajectory.read_jsonl(traj.write_jsonl(tmp_path / "t.jsonl"))
    assert back.records == traj.records
    doc = json.loads(traj.records[0].to_json())
    assert doc["schema_version"] == 1 and doc["t"] == 1
    doc["schema_version"] = 99
    with pytest.raises(ValueError):
        TrajectoryRecord.from_json(json.dumps(doc))


def test_best_tracks_raw_optimum():
    traj = run_hollm(make_benchmark("hartmann3"), RunConfig(T=20), UNIFORM)
    for r in traj.records:
        assert r.best_raw == -r.best_value and r.raw_value == -r.value
    point, value = traj.best()
    assert value == traj.best_values[-1]


def test_noise_zero_is_identity():
    f = make_benchmark("hartmann3")
    noisy = make_noisy(f, 0.0, 5)
    x = (0.2, 0.4, 0.6)
    assert noisy.evaluate(x) == f.evaluate(x)


def test_noise_statistics():
    sigma = 0.3
    f = FunctionObjective(lambda x: 1.0, SearchSpace.box(0, 1, 1))
    noisy = make_noisy(f, sigma, 123)
    res = np.array([noisy.evaluate((0.5,)) - 1.0 for _ in range(10_000)])
    assert abs(res.mean()) <= 0.05 * sigma
    assert abs(res.std(ddof=1) - sigma) <= 0.03 * sigma
    with pytest.raises(ValueError):
        make_noisy(f, -1.0, 0)
