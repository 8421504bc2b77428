"""Multi-seed, multi-method experiment runner and its output files.

Layout of an output directory::

    trajectories/<method>_seed<seed>.jsonl   one record per evaluation
    summary.csv                              per-run rows + mean/stderr rows
    manifest.json                            config snapshot, versions, run status, token totals
"""

from __future__ import annotations

import csv
import json
import logging
import math
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .. import __version__
from ..benchmarks import make_benchmark
from ..core import ObjectiveFunction, RunConfig, rng_stream
from ..generation import GeneratorSpec, UniformRandomGenerator
from ..llm_client import ChatClient, EndpointConfig, HttpChatClient, LlmConfigError, ReplayClient
from ..optimizer import OptimizerAborted, Trajectory, make_noisy, run_global_llm, run_hollm, run_random_search
from .metrics import cumulative_regret, mean_stderr, simple_regret

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

logger = logging.getLogger(__name__)

BASE_METHODS = ("hollm", "global_llm", "rs", "rs_kdtree")
CSV_COLUMNS = ("method", "seed", "t", "best_raw", "best_internal", "simple_regret", "cum_regret")


def parse_method(label: str) -> tuple[str, str | None]:
    """``"hollm:ucb1"`` -> ``("hollm", "ucb1")``."""
    base, _, variant = label.partition(":")
    if base not in BASE_METHODS:
        raise ValueError(f"unknown method {base!r}; choose from {BASE_METHODS}")
    if variant and base not in ("hollm", "rs_kdtree"):
        raise ValueError(f"method {base!r} has no scoring variants")
    return base, variant or None


@dataclass
class ExperimentConfig:
    benchmark: str
    methods: list[str]
    seeds: list[int]
    run: RunConfig = field(default_factory=RunConfig)
    generator: GeneratorSpec = field(default_factory=GeneratorSpec)
    endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    noise_sigma: float | None = None
    output_dir: str = "results"
    offline: bool = False
    fixtures: str | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if not self.methods:
            raise ValueError("at least one method is required")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        for m in self.methods:
            parse_method(m)
        if self.noise_sigma is not None and self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        run = RunConfig.from_dict(data.pop("run", {}))
        generator = GeneratorSpec(**data.pop("generator", {}))
        endpoint = EndpointConfig(**data.pop("endpoint", {}))
        return cls(run=run, generator=generator, endpoint=endpoint, **data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        path = Path(path)
        if path.suffix.lower() == ".toml":
            with path.open("rb") as fh:
                data = tomllib.load(fh)
        else:
            data = json.loads(path.read_text(encoding="utf-8"))
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "methods": list(self.methods),
            "seeds": list(self.seeds),
            "run": self.run.to_dict(),
            "generator": self.generator.to_dict(),
            "endpoint": {"url": self.endpoint.url, "api_key_env": self.endpoint.api_key_env},
            "noise_sigma": self.noise_sigma,
            "output_dir": self.output_dir,
            "offline": self.offline,
            "fixtures": self.fixtures,
            "workers": self.workers,
        }


def make_client(config: ExperimentConfig) -> ChatClient:
    if config.offline:
        if not config.fixtures:
            raise LlmConfigError("offline mode needs a fixtures directory")
        return ReplayClient.from_dir(config.fixtures, cycle=True)
    if config.fixtures:
        return ReplayClient.from_dir(config.fixtures, cycle=True)
    return HttpChatClient(config.endpoint)


def build_objective(config: ExperimentConfig, seed: int) -> ObjectiveFunction:
    objective = make_benchmark(config.benchmark)
    if config.noise_sigma:
        objective = make_noisy(objective, config.noise_sigma, rng_stream(seed, "noise"))
    return objective


def run_one(config: ExperimentConfig, method: str, seed: int, log_path: Path | None = None) -> Trajectory:
    base, variant = parse_method(method)
    run_cfg = replace(config.run, seed=seed)
    if variant:
        run_cfg = replace(run_cfg, scoring_variant=variant)
    objective = build_objective(config, seed)
    if base == "rs":
        return run_random_search(objective, run_cfg, log_path=log_path, method=method)
    if base == "rs_kdtree":
        return run_hollm(objective, run_cfg, UniformRandomGenerator(), log_path=log_path, method=method)
    client = make_client(config) if config.generator.kind == "llm" else None
    if base == "hollm":
        return run_hollm(objective, run_cfg, config.generator, client=client, log_path=log_path, method=method)
    return run_global_llm(objective, run_cfg, config.generator, client=client, log_path=log_path, method=method)


def trajectory_filename(method: str, seed: int) -> str:
    return f"{method.replace(':', '-')}_seed{seed}.jsonl"


def _run_job(args: tuple[ExperimentConfig, str, int, Path]) -> tuple[str, int, dict[str, Any]]:
    config, method, seed, path = args
    try:
        traj = run_one(config, method, seed, log_path=path)
    except OptimizerAborted as exc:
        return method, seed, {"status": "failed", "error": str(exc), "records": exc.trajectory.records}
    except Exception as exc:  # one bad run must not sink the sweep
        logger.exception("run %s seed %s failed", method, seed)
        return method, seed, {"status": "failed", "error": f"{type(exc).__name__}: {exc}", "records": []}
    return method, seed, {"status": "complete", "records": traj.records, "accounting": traj.accounting}


def summary_rows(trajectories: dict[tuple[str, int], Trajectory], f_star: float | None) -> list[dict]:
    """Per-run rows followed by ``seed="mean"`` / ``seed="stderr"`` rows per method and t."""
    rows: list[dict] = []
    by_method: dict[str, list[tuple[int, Trajectory]]] = {}
    for (method, seed), traj in trajectories.items():
        by_method.setdefault(method, []).append((seed, traj))

    def cells(traj: Trajectory) -> dict[str, np.ndarray]:
        best = np.array([r.best_value for r in traj.records])
        out = {"best_raw": np.array([r.best_raw for r in traj.records]), "best_internal": best}
        if f_star is not None:
            out["simple_regret"] = simple_regret(traj, f_star)
            out["cum_regret"] = cumulative_regret(traj, f_star)
        return out

    for method, runs in by_method.items():
        runs.sort(key=lambda item: item[0])
        per_run = {seed: cells(traj) for seed, traj in runs}
        for seed, traj in runs:
            c = per_run[seed]
            for i, rec in enumerate(traj.records):
                rows.append(_row(method, seed, rec.t, {key: arr[i] for key, arr in c.items()}))
        if not runs:
            continue
        horizon = min(len(traj.records) for _, traj in runs)
        for t_idx in range(horizon):
            stats = {key: [per_run[seed][key][t_idx] for seed, _ in runs] for key in per_run[runs[0][0]]}
            means = {key: mean_stderr(vals)[0] for key, vals in stats.items()}
            errs = {key: mean_stderr(vals)[1] for key, vals in stats.items()}
            rows.append(_row(method, "mean", t_idx + 1, means))
            rows.append(_row(method, "stderr", t_idx + 1, errs))
    return rows


def _row(method: str, seed: int | str, t: int, values: dict[str, float]) -> dict:
    row: dict[str, Any] = {"method": method, "seed": seed, "t": t}
    for col in CSV_COLUMNS[3:]:
        v = values.get(col)
        row[col] = "" if v is None else repr(float(v))
    return row


def write_summary_csv(rows: list[dict], path: Path) -> Path:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    return path


def read_summary_csv(path: str | Path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@dataclass
class ExperimentResult:
    output_dir: Path
    trajectories: dict[tuple[str, int], Trajectory]
    summary_csv: Path
    manifest: Path
    failed: list[tuple[str, int]]


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    out = Path(config.output_dir)
    traj_dir = out / "trajectories"
    traj_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(config, m, s, traj_dir / trajectory_filename(m, s)) for m in config.methods for s in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(job) for job in jobs]

    trajectories: dict[tuple[str, int], Trajectory] = {}
    runs_meta = []
    failed = []
    tokens = {"calls": 0, "prompt_tokens": 0, "completion_tokens": 0}
    for (method, seed, res), job in zip(results, jobs):
        entry = {"method": method, "seed": seed, "file": str(job[3].relative_to(out)), "status": res["status"]}
        if res["status"] == "complete":
            trajectories[(method, seed)] = Trajectory(method=method, records=res["records"], accounting=res["accounting"])
            entry["accounting"] = res["accounting"]
            for key in tokens:
                tokens[key] += int(res["accounting"].get("llm", {}).get(key, 0))
        else:
            failed.append((method, seed))
            entry["error"] = res["error"]
            entry["evaluations_completed"] = len(res["records"])
        runs_meta.append(entry)

    f_star = make_benchmark(config.benchmark).known_optimum()
    summary = write_summary_csv(summary_rows(trajectories, f_star), out / "summary.csv")
    manifest_doc = {
        "config": config.to_dict(),
        "f_star_internal": f_star,
        "versions": {
            "hollm": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
        "runs": runs_meta,
        "llm_totals": tokens,
    }
    manifest = out / "manifest.json"
    manifest.write_text(json.dumps(manifest_doc, indent=2, default=_json_default) + "\n", encoding="utf-8")
    return ExperimentResult(out, trajectories, summary, manifest, failed)


def _json_default(obj: Any) -> Any:
    if isinstance(obj, float) and math.isnan(obj):
        return None
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
