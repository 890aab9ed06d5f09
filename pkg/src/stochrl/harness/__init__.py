"""Experiment harness: configs, runners, benchmarks, reports, CLI."""

from .analyze import run_analysis
from .bench import BenchResult, bench_stochmax, expected_call_bound
from .config import ConfigError, RunConfig, make_env
from .metrics import Curve, read_curve, smooth, summarize, write_curve
from .runners import (
    RunResult,
    SeedResult,
    deep_loop,
    evaluate_greedy,
    load_checkpoint,
    make_deep_agent,
    make_tabular_agent,
    run_deep,
    run_tabular,
    save_checkpoint,
    tabular_loop,
)
from .seeds import stream_rng

__all__ = [
    "BenchResult",
    "ConfigError",
    "Curve",
    "RunConfig",
    "RunResult",
    "SeedResult",
    "bench_stochmax",
    "deep_loop",
    "evaluate_greedy",
    "expected_call_bound",
    "load_checkpoint",
    "make_deep_agent",
    "make_env",
    "make_tabular_agent",
    "read_curve",
    "run_analysis",
    "run_deep",
    "run_tabular",
    "save_checkpoint",
    "smooth",
    "stream_rng",
    "summarize",
    "tabular_loop",
    "write_curve",
]
