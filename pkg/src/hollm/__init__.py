"""Hierarchical black-box optimization: KD-tree regions scored as bandit arms,
with candidates proposed inside the chosen regions by a pluggable generator
(an LLM, uniform sampling, or a scripted replay)."""

__version__ = "0.1.0"

from .benchmarks import make_benchmark
from .core import History, Region, RunConfig, SearchSpace, history_best, init_random
from .generation import GeneratorSpec
from .optimizer import Trajectory, make_noisy, run_global_llm, run_hollm, run_random_search

__all__ = [
    "GeneratorSpec",
    "History",
    "Region",
    "RunConfig",
    "SearchSpace",
    "Trajectory",
    "history_best",
    "init_random",
    "make_benchmark",
    "make_noisy",
    "run_global_llm",
    "run_hollm",
    "run_random_search",
]
