import json
import math

import pytest

from hollm.core import RunConfig
from hollm.generation import GeneratorSpec
from hollm.harness.cli import main
from hollm.harness.experiment import (
    CSV_COLUMNS,
    ExperimentConfig,
    parse_method,
    read_summary_csv,
    run_experiment,
    trajectory_filename,
)
from hollm.optimizer import Trajectory

from conftest import FIXTURES


def _config(tmp_path, **kw):
    base = dict(
        benchmark="hartmann3",
        methods=["rs_kdtree", "rs"],
        seeds=[0, 1, 2],
        run=RunConfig(T=15),
        output_dir=str(tmp_path / "out"),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def test_outputs_layout(tmp_path):
    res = run_experiment(_config(tmp_path))
    files = sorted(p.name for p in (res.output_dir / "trajectories").iterdir())
    assert files == sorted(trajectory_filename(m, s) for m in ("rs_kdtree", "rs") for s in (0, 1, 2))
    assert res.summary_csv.exists() and res.manifest.exists() and not res.failed
    rows = read_summary_csv(res.summary_csv)
    assert tuple(rows[0]) == CSV_COLUMNS
    # 6 runs x 15 rows + 2 methods x 15 t x (mean, stderr)
    assert len(rows) == 6 * 15 + 2 * 15 * 2
    manifest = json.loads(res.manifest.read_text())
    assert manifest["f_star_internal"] == 3.86278
    assert {r["status"] for r in manifest["runs"]} == {"complete"}
    assert manifest["config"]["run"]["T"] == 15


def test_csv_deterministic(tmp_path):
    a = run_experiment(_config(tmp_path / "a"))
    b = run_experiment(_config(tmp_path / "b"))
    assert a.summary_csv.read_bytes() == b.summary_csv.read_bytes()
    for name in ("rs_seed1.jsonl", "rs_kdtree_seed2.jsonl"):
        assert (a.output_dir / "trajectories" / name).read_bytes() == (b.output_dir / "trajectories" / name).read_bytes()


def test_mean_stderr_rows_recomputed(tmp_path):
    res = run_experiment(_config(tmp_path))
    rows = read_summary_csv(res.summary_csv)
    for method in ("rs", "rs_kdtree"):
        for t in (1, 8, 15):
            per = [float(r["simple_regret"]) for r in rows if r["method"] == method and r["seed"] in "012" and int(r["t"]) == t]
            assert len(per) == 3
            mean = sum(per) / 3
            se = math.sqrt(sum((x - mean) ** 2 for x in per) / 2) / math.sqrt(3)
            (m_row,) = [r for r in rows if r["method"] == method and r["seed"] == "mean" and int(r["t"]) == t]
            (s_row,) = [r for r in rows if r["method"] == method and r["seed"] == "stderr" and int(r["t"]) == t]
            assert float(m_row["simple_regret"]) == pytest.approx(mean, abs=1e-12)
            assert float(s_row["simple_regret"]) == pytest.approx(se, abs=1e-12)


def test_per_run_rows_match_trajectory(tmp_path):
    res = run_experiment(_config(tmp_path, methods=["hollm"], seeds=[4]))
    traj = Trajectory.read_jsonl(res.output_dir / "trajectories" / "hollm_seed4.jsonl")
    rows = [r for r in read_summary_csv(res.summary_csv) if r["seed"] == "4"]
    assert [float(r["best_raw"]) for r in rows] == [rec.best_raw for rec in traj.records]
    assert [float(r["simple_regret"]) for r in rows] == [3.86278 - rec.best_value for rec in traj.records]


def test_failed_run_recorded(tmp_path):
    empty = tmp_path / "nofixtures"
    empty.mkdir()
    cfg = _config(tmp_path, methods=["hollm", "rs"], seeds=[0], generator=GeneratorSpec(kind="llm"), offline=True, fixtures=str(empty))
    res = run_experiment(cfg)
    assert res.failed == [("hollm", 0)]
    manifest = json.loads(res.manifest.read_text())
    bad = next(r for r in manifest["runs"] if r["method"] == "hollm")
    assert bad["status"] == "failed" and "FixtureError" in bad["error"]
    assert {r["method"] for r in read_summary_csv(res.summary_csv)} == {"rs"}


def test_variant_methods(tmp_path):
    res = run_experiment(_config(tmp_path, methods=["rs_kdtree:uniform", "hollm:ucb1"], seeds=[0]))
    assert (res.output_dir / "trajectories" / "rs_kdtree-uniform_seed0.jsonl").exists()
    assert parse_method("hollm:ucb1") == ("hollm", "ucb1")
    with pytest.raises(ValueError):
        parse_method("rs:ucb1")
    with pytest.raises(ValueError):
        parse_method("bo")


def test_noise_run_differs_but_is_seeded(tmp_path):
    a = run_experiment(_config(tmp_path / "a", methods=["rs"], seeds=[0], noise_sigma=0.1))
    b = run_experiment(_config(tmp_path / "b", methods=["rs"], seeds=[0], noise_sigma=0.1))
    c = run_experiment(_config(tmp_path / "c", methods=["rs"], seeds=[0]))
    assert a.summary_csv.read_bytes() == b.summary_csv.read_bytes() != c.summary_csv.read_bytes()


def test_config_load_toml_and_json(tmp_path):
    toml = tmp_path / "exp.toml"
    toml.write_text(
        'benchmark = "levy:d=3"\nmethods = ["rs"]\nseeds = [1, 2]\n\n[run]\nT = 12\nlambda = 0.5\n\n[generator]\nkind = "uniform_random"\n'
    )
    cfg = ExperimentConfig.load(toml)
    assert cfg.run.T == 12 and cfg.run.leaf_growth == 0.5 and cfg.seeds == [1, 2]
    js = tmp_path / "exp.json"
    js.write_text(json.dumps(cfg.to_dict()))
    back = ExperimentConfig.load(js)
    assert back.to_dict() == cfg.to_dict()
    with pytest.raises(ValueError):
        ExperimentConfig(benchmark="hartmann3", methods=[], seeds=[0])


def test_parallel_workers_match_serial(tmp_path):
    a = run_experiment(_config(tmp_path / "a", seeds=[0, 1]))
    b = run_experiment(_config(tmp_path / "b", seeds=[0, 1], workers=2))
    assert a.summary_csv.read_bytes() == b.summary_csv.read_bytes()


# -- CLI -----------------------------------------------------------------------


def test_cli_run_and_metrics(tmp_path, capsys):
    out = tmp_path / "cli"
    assert main(["run", "--benchmark", "hartmann3", "--method", "rs_kdtree", "--budget", "12", "--seed", "0", "1", "--out", str(out)]) == 0
    assert (out / "trajectories" / "rs_kdtree_seed1.jsonl").exists()
    capsys.readouterr()
    assert main(["metrics", str(out / "trajectories" / "rs_kdtree_seed0.jsonl"), "--benchmark", "hartmann3", "--mc-samples", "1024"]) == 0
    report = json.loads(capsys.readouterr().out)
    run = report["runs"][0]
    assert run["evaluations"] == 12 and run["final_simple_regret"] >= 0 and 0 < run["hausdorff_coverage"] <= math.sqrt(3)


def test_cli_offline_llm_round(tmp_path, capsys):
    out = tmp_path / "offline"
    code = main([
        "run", "--benchmark", "hartmann3", "--method", "hollm", "--generator", "llm", "--offline",
        "--fixtures", str(FIXTURES / "offline_run"), "--budget", "9", "--out", str(out),
    ])
    assert code == 0
    traj = Trajectory.read_jsonl(out / "trajectories" / "hollm_seed0.jsonl")
    assert len(traj) == 9
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["llm_totals"]["calls"] > 0


def test_cli_offline_without_fixtures_fails(tmp_path, capsys):
    code = main(["run", "--benchmark", "hartmann3", "--generator", "llm", "--offline", "--budget", "8", "--out", str(tmp_path / "x")])
    assert code == 1
    manifest = json.loads((tmp_path / "x" / "manifest.json").read_text())
    assert "offline mode needs a fixtures directory" in manifest["runs"][0]["error"]


def test_cli_compare(tmp_path, capsys):
    cfg = tmp_path / "cmp.toml"
    cfg.write_text(f'benchmark = "rastrigin:d=2"\nmethods = ["rs", "global_llm"]\nseeds = [0]\noutput_dir = "{tmp_path / "cmp"}"\n[run]\nT = 10\n')
    assert main(["compare", str(cfg), "--seed", "3"]) == 0
    assert (tmp_path / "cmp" / "trajectories" / "global_llm_seed3.jsonl").exists()


@pytest.mark.parametrize("mode", ["two_prompt", "combined"])
def test_cli_prompt_preview(mode, capsys):
    assert main(["prompt-preview", "--benchmark", "hartmann3", "--history", "3", "--mode", mode]) == 0
    text = capsys.readouterr().out
    assert "x3" in text and "$" not in text
