"""Deep value-network agents: DQN and DDQN, exact or stochastic.

The network scores one (state, action) pair per forward row, so exact
greedy selection costs n evaluations per step while the stochastic
variants evaluate only the candidate set, at most 2*ceil(log2 n) rows.
Row counts are tracked per step, which is what the complexity benchmarks
assert against.

Targets follow the classic scheme: DQN selects and evaluates the
bootstrap action with the target network; DDQN selects with the online
network and evaluates with the target network.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ..core import ActionMemory, CandidateSet, SubsetSampler, build_candidates, default_subset_size
from .mlp import MlpParams, forward_batch, forward_chunked, gradient, init_params, sgd_step, soft_update
from .replay import ReplayBuffer, Transition

ALGORITHMS = ("dqn", "ddqn")


@dataclass
class DeepAgentConfig:
    algorithm: str = "dqn"
    stochastic: bool = True
    gamma: float = 0.99
    lr: float = 0.001
    epsilon_init: float = 1.0
    epsilon_decay: float = 0.995
    epsilon_floor: float = 0.01
    tau: float = 0.01
    k: int | None = None
    memory_mode: str = "global"
    hidden: tuple[int, ...] = (64, 64)

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        if self.lr < 0:
            raise ValueError(f"learning rate must be non-negative, got {self.lr}")
        for name in ("epsilon_init", "epsilon_decay", "epsilon_floor", "tau"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.memory_mode not in ("global", "none"):
            raise ValueError("deep agents support memory modes 'global' and 'none'")


def epsilon_schedule(episode_index: int, config: DeepAgentConfig) -> float:
    """Exploration rate for an episode: init * decay^episode, floored."""
    if episode_index < 0:
        raise ValueError(f"episode index must be non-negative, got {episode_index}")
    return max(config.epsilon_floor, config.epsilon_init * config.epsilon_decay**episode_index)


def compute_target(
    target_params: MlpParams,
    transition: Transition,
    config: DeepAgentConfig,
    sampler: SubsetSampler | None,
    memory: ActionMemory | None,
    feature_table: np.ndarray,
    online_params: MlpParams | None = None,
) -> float:
    """Bootstrap target for one transition.

    Terminal transitions return the raw reward.  Otherwise the candidate
    set (all of A for exact variants) is scored by the selection network
    and the chosen action is valued by the target network.
    """
    if transition.terminated:
        return float(transition.reward)
    n = feature_table.shape[0]
    if config.stochastic:
        candidates = build_candidates(sampler, memory, None).actions
    else:
        candidates = np.arange(n)
    next_state = np.atleast_1d(transition.next_state)
    inputs = np.concatenate(
        [np.broadcast_to(next_state, (candidates.size, next_state.size)), feature_table[candidates]],
        axis=1,
    )
    if config.algorithm == "ddqn":
        if online_params is None:
            raise ValueError("ddqn targets need the online network for action selection")
        scores = forward_chunked(online_params, inputs)
        best_pos = int(np.flatnonzero(scores == scores.max()).min())
        value = float(forward_batch(target_params, inputs[best_pos : best_pos + 1])[0])
    else:
        scores = forward_chunked(target_params, inputs)
        value = float(scores.max())
    return float(transition.reward) + config.gamma * value


class Selection(NamedTuple):
    action: int
    greedy: bool
    candidates: CandidateSet | None


class StepInfo(NamedTuple):
    action: int
    reward: float
    terminated: bool
    truncated: bool
    greedy: bool
    candidates: CandidateSet | None
    select_calls: int
    target_calls: int
    loss: float | None
    select_ns: int
    env_ns: int
    update_ns: int


class DeepAgent:
    """Online/target network pair plus replay machinery for one run.

    Randomness is split across dedicated generator streams (weights,
    exploration, selection subsets, update subsets, batch draws, global
    memory) so variants stay comparable under a shared master seed.
    """

    def __init__(
        self,
        state_dim: int,
        feature_table: np.ndarray,
        config: DeepAgentConfig,
        init_rng=None,
        explore_rng=None,
        select_rng=None,
        update_rng=None,
        batch_rng=None,
        memory_rng=None,
    ) -> None:
        self.config = config
        self.state_dim = state_dim
        self.feature_table = np.asarray(feature_table, dtype=np.float64)
        self.n_actions = self.feature_table.shape[0]
        k = config.k if config.k is not None else default_subset_size(self.n_actions)
        self.k = k
        self.batch_size = default_subset_size(self.n_actions)
        self.buffer = ReplayBuffer(2 * self.batch_size)
        in_dim = state_dim + self.feature_table.shape[1]
        self.online = init_params(in_dim, config.hidden, _rng(init_rng))
        self.target = self.online.copy()
        self.explore_rng = _rng(explore_rng)
        self.batch_rng = _rng(batch_rng)
        if config.stochastic:
            self.select_sampler = SubsetSampler(self.n_actions, k, _rng(select_rng))
            self.update_sampler = SubsetSampler(self.n_actions, k, _rng(update_rng))
            if config.memory_mode == "global":
                self.memory = ActionMemory(
                    "global",
                    sample_size=self.batch_size,
                    pool=self.buffer.actions,
                    rng=_rng(memory_rng),
                )
            else:
                self.memory = ActionMemory("none")
        else:
            self.select_sampler = None
            self.update_sampler = None
            self.memory = None
        self.episode_index = 0
        self.select_calls = 0
        self.target_calls = 0

    @property
    def epsilon(self) -> float:
        return epsilon_schedule(self.episode_index, self.config)

    def begin_episode(self) -> None:
        """Advance the per-episode exploration decay; call after each reset."""
        self.episode_index += 1

    def value(self, state, actions: np.ndarray, params: MlpParams | None = None) -> np.ndarray:
        """Network values of the given actions in ``state`` (uncounted)."""
        params = params if params is not None else self.online
        state = np.atleast_1d(state)
        actions = np.asarray(actions, dtype=np.int64)
        inputs = np.concatenate(
            [np.broadcast_to(state, (actions.size, state.size)), self.feature_table[actions]],
            axis=1,
        )
        return forward_chunked(params, inputs)

    def select(self, state) -> Selection:
        if self.explore_rng.random() < self.epsilon:
            return Selection(int(self.explore_rng.integers(0, self.n_actions)), False, None)
        if self.config.stochastic:
            candidates = build_candidates(self.select_sampler, self.memory, None)
            scores = self.value(state, candidates.actions)
            self.select_calls += candidates.actions.size
            best = float(scores.max())
            action = int(candidates.actions[scores == best].min())
            return Selection(action, True, candidates)
        scores = self.value(state, np.arange(self.n_actions))
        self.select_calls += self.n_actions
        return Selection(int(np.argmax(scores)), True, None)

    def _batch_targets(self, batch: list[Transition]) -> np.ndarray:
        """Bootstrap targets for a batch; one fresh subset per transition.

        All candidate rows are scored in a single forward pass per network
        and still counted per row.
        """
        cfg = self.config
        n = self.n_actions
        rows = []
        slices = []
        start = 0
        shared_memory = None
        if cfg.stochastic and self.memory is not None and self.memory.mode == "global":
            shared_memory = self.memory.recall(None)
        for t in batch:
            if t.terminated:
                slices.append(None)
                continue
            if cfg.stochastic:
                cand = self.update_sampler.sample()
                if shared_memory is not None and shared_memory.size:
                    cand = np.union1d(cand, shared_memory)
            else:
                cand = np.arange(n)
            state = np.atleast_1d(t.next_state)
            rows.append(
                np.concatenate(
                    [np.broadcast_to(state, (cand.size, state.size)), self.feature_table[cand]],
                    axis=1,
                )
            )
            slices.append((start, start + cand.size))
            start += cand.size
        targets = np.empty(len(batch))
        if rows:
            stacked = np.concatenate(rows, axis=0)
            select_params = self.online if cfg.algorithm == "ddqn" else self.target
            scores = forward_chunked(select_params, stacked)
            self.target_calls += stacked.shape[0]
            if cfg.algorithm == "ddqn":
                best_rows = []
                for sl in slices:
                    if sl is None:
                        continue
                    lo, hi = sl
                    seg = scores[lo:hi]
                    best_rows.append(lo + int(np.flatnonzero(seg == seg.max()).min()))
                values = forward_batch(self.target, stacked[best_rows])
                self.target_calls += len(best_rows)
        value_pos = 0
        for i, (t, sl) in enumerate(zip(batch, slices)):
            if sl is None:
                targets[i] = t.reward
                continue
            lo, hi = sl
            if cfg.algorithm == "ddqn":
                targets[i] = t.reward + cfg.gamma * float(values[value_pos])
                value_pos += 1
            else:
                targets[i] = t.reward + cfg.gamma * float(scores[lo:hi].max())
        return targets

    def learn(self) -> float | None:
        """One gradient step on a fresh batch; no-op until the buffer fills."""
        if len(self.buffer) < self.batch_size:
            return None
        batch = self.buffer.sample(self.batch_size, self.batch_rng)
        targets = self._batch_targets(batch)
        inputs = np.stack(
            [np.concatenate([np.atleast_1d(t.state), t.action_features]) for t in batch]
        )
        grads, loss = gradient(self.online, inputs, targets)
        sgd_step(self.online, grads, self.config.lr)
        soft_update(self.target, self.online, self.config.tau)
        return loss

    def observe(self, state, action: int, reward: float, next_state, terminated: bool) -> None:
        self.buffer.push(
            Transition(
                state=np.atleast_1d(state).copy(),
                action=int(action),
                action_features=self.feature_table[action].copy(),
                reward=float(reward),
                next_state=np.atleast_1d(next_state).copy(),
                terminated=bool(terminated),
            )
        )

    def train_step(self, env, state) -> tuple[object, StepInfo]:
        """One interaction, buffer push, gradient step and target blend."""
        select_before = self.select_calls
        target_before = self.target_calls
        t0 = time.perf_counter_ns()
        selection = self.select(state)
        t1 = time.perf_counter_ns()
        next_state, reward, terminated, truncated = env.step(selection.action)
        t2 = time.perf_counter_ns()
        self.observe(state, selection.action, reward, next_state, terminated)
        loss = self.learn()
        t3 = time.perf_counter_ns()
        info = StepInfo(
            action=selection.action,
            reward=reward,
            terminated=terminated,
            truncated=truncated,
            greedy=selection.greedy,
            candidates=selection.candidates,
            select_calls=self.select_calls - select_before,
            target_calls=self.target_calls - target_before,
            loss=loss,
            select_ns=t1 - t0,
            env_ns=t2 - t1,
            update_ns=t3 - t2,
        )
        return next_state, info


def _rng(value) -> np.random.Generator:
    if isinstance(value, np.random.Generator):
        return value
    return np.random.default_rng(value)
