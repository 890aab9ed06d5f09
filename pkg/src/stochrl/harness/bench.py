"""Wall-time scaling benchmark for stochastic vs exact maximization.

Times greedy action selection (and optionally whole training steps) of
the deep agents across a ladder of action-space sizes, reporting medians
and interquartile ranges plus a log-log slope per series.  Absolute
seconds are hardware-dependent; the slopes are the portable result: exact
selection grows linearly in n, stochastic selection stays near-flat.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from ..approx.agent import DeepAgent, DeepAgentConfig
from ..envs import CartPoleBalance
from ..envs.actionmap import DiscretizedActionMap
from .seeds import stream_rng

SELECTION_SERIES = ("stoch-select", "exact-select")
TRAIN_SERIES = ("stoch-train", "exact-train")
ALL_SERIES = SELECTION_SERIES + TRAIN_SERIES


@dataclass
class BenchRow:
    n: int
    series: str
    median_ns: float
    iqr_ns: float
    calls: int  # network rows evaluated per selection; 0 for train series


@dataclass
class BenchResult:
    rows: list[BenchRow] = field(default_factory=list)
    slopes: dict = field(default_factory=dict)

    def series_rows(self, series: str) -> list[BenchRow]:
        return [r for r in self.rows if r.series == series]


def _greedy_config(stochastic: bool) -> DeepAgentConfig:
    # zero exploration so every timed call is a full greedy maximization
    return DeepAgentConfig(
        algorithm="dqn", stochastic=stochastic, epsilon_init=0.0, epsilon_floor=0.0
    )


def _make_agent(n: int, stochastic: bool, seed: int, state_dim: int) -> DeepAgent:
    table = DiscretizedActionMap(granularity=n, lower=(-3.0,), upper=(3.0,)).table_scaled()
    return DeepAgent(
        state_dim=state_dim,
        feature_table=table,
        config=_greedy_config(stochastic),
        init_rng=stream_rng(seed, "init"),
        explore_rng=stream_rng(seed, "explore"),
        select_rng=stream_rng(seed, "select"),
        update_rng=stream_rng(seed, "update"),
        batch_rng=stream_rng(seed, "batch"),
        memory_rng=stream_rng(seed, "memory"),
    )


def _time_selection(agent: DeepAgent, state: np.ndarray, repetitions: int) -> tuple[np.ndarray, int]:
    for _ in range(3):  # warm caches and allocator
        agent.select(state)
    times = np.empty(repetitions)
    for i in range(repetitions):
        t0 = time.perf_counter_ns()
        agent.select(state)
        times[i] = time.perf_counter_ns() - t0
    before = agent.select_calls
    agent.select(state)
    calls = agent.select_calls - before
    return times, calls


def _time_train(n: int, stochastic: bool, seed: int, repetitions: int) -> np.ndarray:
    env = CartPoleBalance(granularity=n, rng=stream_rng(seed, "env"))
    agent = _make_agent(n, stochastic, seed, env.state_dim)
    state = env.reset()
    for _ in range(agent.batch_size + 3):  # fill the buffer before timing
        state, info = agent.train_step(env, state)
        if info.terminated or info.truncated:
            state = env.reset()
    times = np.empty(repetitions)
    for i in range(repetitions):
        t0 = time.perf_counter_ns()
        state, info = agent.train_step(env, state)
        times[i] = time.perf_counter_ns() - t0
        if info.terminated or info.truncated:
            state = env.reset()
    return times


def _loglog_slope(ns: list[int], medians: list[float]) -> float:
    x = np.log(np.asarray(ns, dtype=np.float64))
    y = np.log(np.asarray(medians, dtype=np.float64))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def bench_stochmax(
    n_list: list[int],
    repetitions: int = 30,
    series: tuple[str, ...] = ALL_SERIES,
    seed: int = 0,
    state_dim: int = 4,
) -> BenchResult:
    """Benchmark the requested series over ascending action-set sizes."""
    if list(n_list) != sorted(n_list) or len(set(n_list)) != len(n_list):
        raise ValueError("n_list must be strictly ascending")
    if min(n_list) < 2:
        raise ValueError("action counts below 2 cannot be discretized")
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    unknown = set(series) - set(ALL_SERIES)
    if unknown:
        raise ValueError(f"unknown series {sorted(unknown)}; expected among {ALL_SERIES}")
    result = BenchResult()
    state = stream_rng(seed, "diag").uniform(-0.05, 0.05, size=state_dim)
    for n in n_list:
        if "stoch-select" in series or "exact-select" in series:
            stoch_agent = _make_agent(n, True, seed, state_dim)
            exact_agent = _make_agent(n, False, seed, state_dim)
            # identical weights so both variants score the same function
            exact_agent.online = stoch_agent.online.copy()
            if "stoch-select" in series:
                times, calls = _time_selection(stoch_agent, state, repetitions)
                result.rows.append(_row(n, "stoch-select", times, calls))
            if "exact-select" in series:
                times, calls = _time_selection(exact_agent, state, repetitions)
                result.rows.append(_row(n, "exact-select", times, calls))
        if "stoch-train" in series:
            result.rows.append(_row(n, "stoch-train", _time_train(n, True, seed, repetitions), 0))
        if "exact-train" in series:
            result.rows.append(_row(n, "exact-train", _time_train(n, False, seed, repetitions), 0))
    for name in series:
        rows = result.series_rows(name)
        if len(rows) >= 2:
            result.slopes[name] = _loglog_slope([r.n for r in rows], [r.median_ns for r in rows])
    return result


def _row(n: int, series: str, times: np.ndarray, calls: int) -> BenchRow:
    q1, med, q3 = np.percentile(times, [25, 50, 75])
    return BenchRow(n=n, series=series, median_ns=float(med), iqr_ns=float(q3 - q1), calls=calls)


def write_bench_csv(path, result: BenchResult) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,series,median_ns,iqr_ns,calls\n")
        for r in result.rows:
            fh.write(f"{r.n},{r.series},{r.median_ns!r},{r.iqr_ns!r},{r.calls}\n")
        for name, slope in sorted(result.slopes.items()):
            fh.write(f"slope,{name},{slope!r},,\n")


def expected_call_bound(n: int) -> int:
    """Cap on network rows per stochastic greedy selection: 2*ceil(log2 n)."""
    return 2 * max(1, math.ceil(math.log2(n)))
