"""Command line entry point: ``hollm run | compare | metrics | prompt-preview``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

import numpy as np

from ..benchmarks import make_benchmark
from ..core import History, RunConfig, init_random
from ..generation import build_combined_prompt, build_generation_prompt, build_prediction_prompt
from ..optimizer import Trajectory
from .experiment import ExperimentConfig, run_experiment
from .metrics import HAUSDORFF_NOTE, batch_icl_divergence, cumulative_regret, hausdorff_coverage, simple_regret, to_unit_cube


def _common_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--budget", type=int, help="total evaluations T")
    p.add_argument("--generator", choices=["llm", "uniform_random", "scripted_mock"])
    p.add_argument("--endpoint", help="chat-completions URL")
    p.add_argument("--model")
    p.add_argument("--offline", action="store_true", help="forbid network access; replay fixtures only")
    p.add_argument("--fixtures", help="directory of recorded LLM fixtures")
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int)


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    if args.budget is not None:
        cfg.run = replace(cfg.run, T=args.budget)
    if args.generator:
        cfg.generator = replace(cfg.generator, kind=args.generator)
    if args.model:
        cfg.generator = replace(cfg.generator, model=args.model)
    if args.endpoint:
        cfg.endpoint = replace(cfg.endpoint, url=args.endpoint)
    if args.offline:
        cfg.offline = True
    if args.fixtures:
        cfg.fixtures = args.fixtures
    if args.out:
        cfg.output_dir = args.out
    if args.workers:
        cfg.workers = args.workers
    if getattr(args, "seed", None):
        cfg.seeds = list(args.seed)
    return cfg


def _report(result) -> int:
    for (method, seed), traj in sorted(result.trajectories.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        last = traj.records[-1]
        print(f"{method:<18} seed={seed:<4} t={last.t:<4} best_raw={last.best_raw:.6g}")
    for method, seed in result.failed:
        print(f"{method:<18} seed={seed:<4} FAILED (see manifest)")
    print(f"wrote {result.summary_csv} and {result.manifest}")
    return 1 if result.failed else 0


def cmd_run(args: argparse.Namespace) -> int:
    run_fields = {"seed": 0}
    for name in ("n0", "b", "M", "k", "m0", "leaf_growth", "alpha_max", "alpha_min"):
        value = getattr(args, name)
        if value is not None:
            run_fields[name] = value
    if args.variant:
        run_fields["scoring_variant"] = args.variant
    cfg = ExperimentConfig(
        benchmark=args.benchmark,
        methods=[args.method],
        seeds=[0],
        run=RunConfig(**run_fields),
        noise_sigma=args.noise_sigma,
        output_dir="results",
    )
    cfg = _apply_overrides(cfg, args)
    return _report(run_experiment(cfg))


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = _apply_overrides(ExperimentConfig.load(args.config), args)
    return _report(run_experiment(cfg))


def cmd_metrics(args: argparse.Namespace) -> int:
    bench = make_benchmark(args.benchmark) if args.benchmark else None
    f_star = args.f_star if args.f_star is not None else (bench.known_optimum() if bench else None)
    report = {"hausdorff_method": HAUSDORFF_NOTE, "runs": []}
    for path in args.trajectories:
        traj = Trajectory.read_jsonl(path)
        entry = {
            "file": str(path),
            "evaluations": len(traj),
            "best_internal": float(traj.best_values[-1]),
            "best_raw": traj.records[-1].best_raw,
            "icl_divergence": batch_icl_divergence(traj),
        }
        if f_star is not None:
            entry["final_simple_regret"] = float(simple_regret(traj, f_star)[-1])
            entry["final_cumulative_regret"] = float(cumulative_regret(traj, f_star)[-1])
        points = traj.points
        if bench is not None:
            space = bench.space()
            points = to_unit_cube(points, space.lower, space.upper)
        entry["hausdorff_coverage"] = hausdorff_coverage(points, args.mc_samples, args.mc_seed)
        report["runs"].append(entry)
    print(json.dumps(report, indent=2))
    return 0


def cmd_prompt_preview(args: argparse.Namespace) -> int:
    objective = make_benchmark(args.benchmark)
    space = objective.space()
    history = History(space)
    for x in init_random(space, args.history, args.seed):
        history.add(x, objective.evaluate(x))
    region = space.as_region()
    if args.mode == "combined":
        print(build_combined_prompt(history, region, args.k, args.context_cap))
        return 0
    print(build_generation_prompt(history, region, args.k, args.context_cap))
    print("\n" + "=" * 72 + "\n")
    candidates = region.sample_uniform(args.k, np.random.default_rng(args.seed + 1))
    print(build_prediction_prompt(history, candidates.tolist(), args.context_cap, region=region))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hollm", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a single method on one benchmark")
    p.add_argument("--benchmark", required=True, help='e.g. "hartmann3" or "levy:d=10"')
    p.add_argument("--method", default="hollm", help="hollm, global_llm, rs, rs_kdtree (optionally :variant)")
    p.add_argument("--seed", type=int, nargs="+")
    p.add_argument("--variant", choices=["ucbv", "ucb1", "exploit_only", "explore_only", "uniform"])
    p.add_argument("--noise-sigma", type=float)
    for name, kind in (("n0", int), ("b", int), ("M", int), ("k", int), ("m0", int)):
        p.add_argument(f"--{name}", type=kind)
    p.add_argument("--leaf-growth", dest="leaf_growth", type=float)
    p.add_argument("--alpha-max", dest="alpha_max", type=float)
    p.add_argument("--alpha-min", dest="alpha_min", type=float)
    _common_overrides(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="run an experiment described by a TOML/JSON config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, nargs="+")
    _common_overrides(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("metrics", help="analyze trajectory files")
    p.add_argument("trajectories", nargs="+", type=Path)
    p.add_argument("--benchmark", help="used for the optimum and to rescale points to the unit cube")
    p.add_argument("--f-star", type=float, help="internal (maximized) optimum value")
    p.add_argument("--mc-samples", type=int, default=2**16)
    p.add_argument("--mc-seed", type=int, default=0)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("prompt-preview", help="render prompts without calling any endpoint")
    p.add_argument("--benchmark", required=True)
    p.add_argument("--history", type=int, default=5, help="number of random evaluations to show")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--context-cap", type=int, default=100)
    p.add_argument("--mode", choices=["two_prompt", "combined"], default="two_prompt")
    p.set_defaults(func=cmd_prompt_preview)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
