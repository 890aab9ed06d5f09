"""Tabular Q-learning, Double Q-learning and Sarsa, exact or stochastic.

The stochastic variants replace the argmax in the policy and the max in
the bootstrap target with their candidate-set counterparts from
:mod:`stochrl.core`.  Learning rates follow a per-pair polynomial schedule
alpha = z**-0.8 and exploration decays as 1/sqrt(state visits), both
counters starting at 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    ActionMemory,
    CandidateSet,
    SubsetSampler,
    build_candidates,
    stoch_argmax,
    stoch_max,
)

ALGORITHMS = ("q", "double-q", "sarsa")
MEMORY_MODES = ("per-state", "global", "none")


@dataclass
class QTable:
    """Dense state-action values plus the visit counters the schedules use."""

    values: np.ndarray
    visits: np.ndarray
    state_visits: np.ndarray

    @classmethod
    def zeros(cls, n_states: int, n_actions: int) -> "QTable":
        return cls(
            values=np.zeros((n_states, n_actions)),
            visits=np.ones((n_states, n_actions), dtype=np.int64),
            state_visits=np.ones(n_states, dtype=np.int64),
        )

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    def oracle(self):
        """Value oracle ``(state, actions) -> values`` over this table."""
        values = self.values
        return lambda state, actions: values[state, actions]


@dataclass
class TabularAgentConfig:
    algorithm: str = "q"
    stochastic: bool = True
    gamma: float = 0.95
    lr_exponent: float = 0.8
    k: int | None = None
    memory_mode: str = "per-state"
    memory_capacity: int = 2
    epsilon: float | None = None  # None selects the 1/sqrt(z(s)) schedule

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        # Robbins-Monro summability along visited pairs needs 0.5 < exponent <= 1
        if not 0.5 < self.lr_exponent <= 1.0:
            raise ValueError(f"lr exponent must be in (0.5, 1], got {self.lr_exponent}")
        if self.memory_mode not in MEMORY_MODES:
            raise ValueError(f"unknown memory mode {self.memory_mode!r}")
        if self.epsilon is not None and not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must be in [0, 1], got {self.epsilon}")


def learning_rate(z: int, exponent: float = 0.8) -> float:
    """Polynomial step size z**-exponent for a pair visited z times."""
    if z < 1:
        raise ValueError(f"visit count must be at least 1, got {z}")
    return float(z) ** -exponent


def exploration_rate(z_s: int) -> float:
    """Decaying exploration probability 1/sqrt(z(s))."""
    if z_s < 1:
        raise ValueError(f"state visit count must be at least 1, got {z_s}")
    return 1.0 / np.sqrt(z_s)


class Selection(NamedTuple):
    action: int
    greedy: bool
    candidates: CandidateSet | None  # None for exact variants and random picks


def select_action(
    q: QTable,
    state: int,
    config: TabularAgentConfig,
    sampler: SubsetSampler | None,
    memory: ActionMemory | None,
    rng: np.random.Generator,
) -> int:
    """Epsilon-greedy pick; greedy choices go through (stoch)argmax."""
    return _select(q.values, q.state_visits, state, config, sampler, memory, rng).action


def _select(values, state_visits, state, config, sampler, memory, rng) -> Selection:
    eps = config.epsilon if config.epsilon is not None else exploration_rate(state_visits[state])
    n = values.shape[1]
    if rng.random() < eps:
        return Selection(int(rng.integers(0, n)), False, None)
    if not config.stochastic:
        return Selection(int(np.argmax(values[state])), True, None)
    candidates = build_candidates(sampler, memory, state)
    row = values[state]
    action = stoch_argmax(lambda s, a: row[a], state, candidates)
    if memory is not None:
        memory.record(state, action)
    return Selection(action, True, candidates)


def _bootstrap(values_row, config, sampler, memory, next_state) -> tuple[float, CandidateSet | None]:
    """Max (exact) or stoch_max over a freshly sampled candidate set."""
    if not config.stochastic:
        return float(values_row.max()), None
    candidates = build_candidates(sampler, memory, next_state)
    return stoch_max(lambda s, a: values_row[a], next_state, candidates), candidates


def q_update(
    q: QTable,
    transition: tuple,
    config: TabularAgentConfig,
    sampler: SubsetSampler | None,
    memory: ActionMemory | None,
) -> QTable:
    """One Q-learning backup; mutates and returns ``q``.

    The stochastic target maximizes over candidates drawn fresh for this
    update, never reusing the selection-time subset, so the update noise
    stays independent of the behaviour policy's draw.
    """
    state, action, reward, next_state, terminated = transition
    alpha = learning_rate(q.visits[state, action], config.lr_exponent)
    if terminated:
        target = reward
    else:
        bootstrap, _ = _bootstrap(q.values[next_state], config, sampler, memory, next_state)
        target = reward + config.gamma * bootstrap
    q.values[state, action] += alpha * (target - q.values[state, action])
    q.visits[state, action] += 1
    q.state_visits[state] += 1
    return q


def double_q_update(
    q_a: QTable,
    q_b: QTable,
    transition: tuple,
    config: TabularAgentConfig,
    sampler: SubsetSampler | None,
    memory: ActionMemory | None,
    rng: np.random.Generator,
) -> tuple[QTable, QTable]:
    """Double Q-learning backup: a fair coin picks which table to update.

    The updated table selects the bootstrap action, the other evaluates
    it.  Per-table visit counters drive the step size; the shared state
    counter (kept on table A) drives exploration decay.
    """
    state, action, reward, next_state, terminated = transition
    if rng.random() < 0.5:
        updated, other = q_a, q_b
    else:
        updated, other = q_b, q_a
    alpha = learning_rate(updated.visits[state, action], config.lr_exponent)
    if terminated:
        target = reward
    else:
        row = updated.values[next_state]
        if config.stochastic:
            candidates = build_candidates(sampler, memory, next_state)
            best = stoch_argmax(lambda s, a: row[a], next_state, candidates)
        else:
            best = int(np.argmax(row))
        target = reward + config.gamma * other.values[next_state, best]
    updated.values[state, action] += alpha * (target - updated.values[state, action])
    updated.visits[state, action] += 1
    q_a.state_visits[state] += 1
    return q_a, q_b


def sarsa_update(q: QTable, transition: tuple, config: TabularAgentConfig) -> QTable:
    """On-policy backup toward r + gamma * Q(s', a') for the chosen a'."""
    state, action, reward, next_state, next_action, terminated = transition
    alpha = learning_rate(q.visits[state, action], config.lr_exponent)
    if terminated:
        target = reward
    else:
        target = reward + config.gamma * q.values[next_state, next_action]
    q.values[state, action] += alpha * (target - q.values[state, action])
    q.visits[state, action] += 1
    q.state_visits[state] += 1
    return q


class TabularAgent:
    """Driver-facing wrapper tying tables, samplers and memory together.

    Randomness is split across dedicated streams (exploration, selection
    subsets, update subsets, the double-Q coin) so switching variants or
    toggling diagnostics never perturbs the other streams.
    """

    def __init__(
        self,
        n_states: int,
        n_actions: int,
        config: TabularAgentConfig,
        explore_rng: np.random.Generator | int | None = None,
        select_seed: int | None = None,
        update_seed: int | None = None,
        coin_rng: np.random.Generator | int | None = None,
    ) -> None:
        self.config = config
        self.n_states = n_states
        self.n_actions = n_actions
        self.explore_rng = _rng(explore_rng)
        self.coin_rng = _rng(coin_rng)
        self.q = QTable.zeros(n_states, n_actions)
        self.q_b = QTable.zeros(n_states, n_actions) if config.algorithm == "double-q" else None
        if config.stochastic:
            if config.memory_mode == "global":
                raise ValueError("tabular agents use per-state or no memory; global is for continuous states")
            self.select_sampler = SubsetSampler(n_actions, config.k, _rng(select_seed))
            self.update_sampler = SubsetSampler(n_actions, config.k, _rng(update_seed))
            self.memory = (
                ActionMemory("per-state", capacity=config.memory_capacity)
                if config.memory_mode == "per-state"
                else ActionMemory("none")
            )
        else:
            self.select_sampler = None
            self.update_sampler = None
            self.memory = None

    @property
    def on_policy(self) -> bool:
        return self.config.algorithm == "sarsa"

    def policy_values(self, state: int) -> np.ndarray:
        """Values the behaviour policy ranks actions by (sum for double-Q)."""
        if self.q_b is not None:
            return self.q.values[state] + self.q_b.values[state]
        return self.q.values[state]

    def select(self, state: int) -> Selection:
        if self.q_b is not None:
            values = self.q.values + self.q_b.values
            visits = self.q.state_visits
            return _select(
                values, visits, state, self.config, self.select_sampler, self.memory, self.explore_rng
            )
        return _select(
            self.q.values,
            self.q.state_visits,
            state,
            self.config,
            self.select_sampler,
            self.memory,
            self.explore_rng,
        )

    def greedy_action(self, state: int) -> int:
        return int(np.argmax(self.policy_values(state)))

    def update(self, state, action, reward, next_state, terminated, next_action=None) -> None:
        transition = (state, action, reward, next_state, terminated)
        if self.config.algorithm == "q":
            q_update(self.q, transition, self.config, self.update_sampler, self.memory)
        elif self.config.algorithm == "double-q":
            double_q_update(
                self.q, self.q_b, transition, self.config, self.update_sampler, self.memory, self.coin_rng
            )
        else:
            if next_action is None:
                raise ValueError("sarsa update needs the next action")
            sarsa_update(
                self.q,
                (state, action, reward, next_state, next_action, terminated),
                self.config,
            )


def _rng(value) -> np.random.Generator:
    if isinstance(value, np.random.Generator):
        return value
    return np.random.default_rng(value)
