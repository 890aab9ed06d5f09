"""Named analysis experiments with pass/fail reports.

Bridges the CLI to the numerical checks: each experiment returns a plain
dict with a ``passed`` flag and its statistics, suitable for JSON output.
"""

from __future__ import annotations

import math

import numpy as np

from ..analysis import (
    AnalysisFailure,
    PhiOperatorSpec,
    contraction_check,
    hitting_times,
    lemma1_probability,
    qstar_fixed_point,
    random_mdp_tables,
    uniform_expected_max,
)
from ..core import default_subset_size
from ..envs.base import Env
from ..tabular import TabularAgent, TabularAgentConfig
from .seeds import stream_rng

ANALYSES = ("lemma1", "uniform", "contraction", "qstar-convergence", "hitting-time")


class TableMdp(Env):
    """Continuing MDP over explicit reward/transition tables."""

    def __init__(self, rewards: np.ndarray, transitions: np.ndarray, rng=None) -> None:
        super().__init__(rng)
        self.rewards = np.asarray(rewards, dtype=np.float64)
        self.transitions = np.asarray(transitions, dtype=np.float64)
        self._cdf = np.cumsum(self.transitions, axis=2)
        self.n_states, self.n_actions = self.rewards.shape
        self._state = 0

    def _reset(self) -> int:
        self._state = 0
        return self._state

    def _step(self, action: int):
        reward = float(self.rewards[self._state, action])
        row = self._cdf[self._state, action]
        self._state = min(
            int(np.searchsorted(row, self.rng.random(), side="right")), self.n_states - 1
        )
        return self._state, reward, False, False


def run_analysis(which: str, **params) -> dict:
    """Run one named analysis; returns its report dict."""
    if which not in ANALYSES:
        raise ValueError(f"unknown analysis {which!r}; expected one of {ANALYSES}")
    return _DISPATCH[which](**params)


def _lemma1(n: int = 256, k: int | None = None, trials: int = 1_000_000, seed: int = 0) -> dict:
    k = k if k is not None else default_subset_size(n)
    expected = k / n
    sigma = math.sqrt(expected * (1 - expected) / trials)
    try:
        empirical = lemma1_probability(n, k, trials, seed)
        passed = abs(empirical - expected) <= 3 * sigma
        message = "" if passed else "empirical inclusion probability outside 3 sigma of k/n"
    except AnalysisFailure as err:
        empirical = math.nan
        passed = False
        message = str(err)
    return {
        "analysis": "lemma1",
        "passed": passed,
        "n": n,
        "k": k,
        "trials": trials,
        "empirical": empirical,
        "expected": expected,
        "sigma": sigma,
        "message": message,
    }


def _uniform(
    n: int = 1000,
    k: int | None = None,
    low: float = 0.0,
    high: float = 100.0,
    trials: int = 100_000,
    seed: int = 0,
) -> dict:
    k = k if k is not None else default_subset_size(n)
    expected = high - (high - low) / (k + 1)
    try:
        mean = uniform_expected_max(n, k, (low, high), trials, seed)
        passed, message = True, ""
    except AnalysisFailure as err:
        mean, passed, message = math.nan, False, str(err)
    return {
        "analysis": "uniform",
        "passed": passed,
        "n": n,
        "k": k,
        "trials": trials,
        "mean": mean,
        "expected": expected,
        "message": message,
    }


def _contraction(
    n_states: int = 4,
    n_actions: int = 6,
    gamma: float = 0.95,
    k: int | None = None,
    trials: int = 1000,
    seed: int = 0,
) -> dict:
    rewards, transitions = random_mdp_tables(n_states, n_actions, seed)
    k = k if k is not None else default_subset_size(n_actions)
    spec = PhiOperatorSpec(rewards, transitions, gamma, ("uniform", k))
    try:
        ratio = contraction_check(spec, trials, seed)
        passed = ratio <= gamma + 1e-9
        message = "" if passed else f"max ratio {ratio} exceeds gamma {gamma}"
    except AnalysisFailure as err:
        ratio, passed, message = math.nan, False, str(err)
    return {
        "analysis": "contraction",
        "passed": passed,
        "gamma": gamma,
        "k": k,
        "trials": trials,
        "max_ratio": ratio,
        "message": message,
    }


def _qstar_convergence(
    n_states: int = 3,
    n_actions: int = 5,
    k: int = 2,
    gamma: float = 0.8,
    epsilon: float = 0.3,
    steps: int = 200_000,
    seed: int = 0,
    tol: float = 0.05,
) -> dict:
    rewards, transitions = random_mdp_tables(n_states, n_actions, seed=0)
    spec = PhiOperatorSpec(rewards, transitions, gamma, ("uniform", k))
    qstar = qstar_fixed_point(spec, tolerance=1e-10)
    agent = train_on_tables(rewards, transitions, gamma, k, epsilon, steps, seed)
    gap = float(np.max(np.abs(agent.q.values - qstar)))
    passed = gap < tol
    return {
        "analysis": "qstar-convergence",
        "passed": passed,
        "n_states": n_states,
        "n_actions": n_actions,
        "k": k,
        "gamma": gamma,
        "steps": steps,
        "seed": seed,
        "sup_norm_gap": gap,
        "tolerance": tol,
        "message": "" if passed else f"sup-norm gap {gap} not below {tol}",
    }


def train_on_tables(
    rewards: np.ndarray,
    transitions: np.ndarray,
    gamma: float,
    k: int,
    epsilon: float,
    steps: int,
    seed: int,
) -> TabularAgent:
    """Memoryless stochastic Q-learning on a continuing table MDP."""
    env = TableMdp(rewards, transitions, rng=stream_rng(seed, "env"))
    config = TabularAgentConfig(
        algorithm="q",
        stochastic=True,
        gamma=gamma,
        k=k,
        memory_mode="none",
        epsilon=epsilon,
    )
    agent = TabularAgent(
        env.n_states,
        env.n_actions,
        config,
        explore_rng=stream_rng(seed, "explore"),
        select_seed=stream_rng(seed, "select"),
        update_seed=stream_rng(seed, "update"),
    )
    state = env.reset()
    for _ in range(steps):
        selection = agent.select(state)
        next_state, reward, _, _ = env.step(selection.action)
        agent.update(state, selection.action, reward, next_state, False)
        state = next_state
    return agent


def _hitting_time(n: int = 5000, k: int | None = None, runs: int = 10_000, seed: int = 0) -> dict:
    k = k if k is not None else default_subset_size(n)
    times = hitting_times(n, k, runs, seed)
    bound = n / default_subset_size(n)
    mean = float(times.mean())
    stderr = float(times.std(ddof=1)) / math.sqrt(runs)
    # the geometric-mean bound is tight for a unique optimum, so the
    # decision allows the Monte-Carlo error of the sample mean
    passed = mean <= bound + 3 * stderr
    return {
        "analysis": "hitting-time",
        "passed": passed,
        "n": n,
        "k": k,
        "runs": runs,
        "mean_hitting_time": mean,
        "bound": bound,
        "stderr": stderr,
        "max_hitting_time": int(times.max()),
        "message": "" if passed else f"mean hitting time {mean} exceeds {bound} + 3 SE",
    }


_DISPATCH = {
    "lemma1": _lemma1,
    "uniform": _uniform,
    "contraction": _contraction,
    "qstar-convergence": _qstar_convergence,
    "hitting-time": _hitting_time,
}
