"""Synthetic finite MDP with a large action set.

Rewards are drawn once per (state, action) from a normal distribution and
then frozen; transition rows come from a flat Dirichlet, so every state
remains reachable.  The task is continuing: episodes only truncate at the
horizon, they never terminate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Env


@dataclass(frozen=True)
class GeneratedMdpSpec:
    n_states: int = 3
    n_actions: int = 256
    reward_mean: float = -50.0
    reward_std: float = 50.0
    horizon: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_states < 1 or self.n_actions < 1:
            raise ValueError("state and action counts must be positive")
        if self.reward_std < 0:
            raise ValueError("reward std must be non-negative")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")

    def build_tables(self) -> tuple[np.ndarray, np.ndarray]:
        """Frozen (rewards, transitions) tables; fixed by the spec seed."""
        rng = np.random.default_rng(self.seed)
        rewards = rng.normal(self.reward_mean, self.reward_std, size=(self.n_states, self.n_actions))
        transitions = rng.dirichlet(
            np.ones(self.n_states), size=(self.n_states, self.n_actions)
        )
        return rewards, transitions


class GeneratedMdp(Env):
    """Tabular environment over the spec's frozen reward/transition tables."""

    def __init__(self, spec: GeneratedMdpSpec, rng=None) -> None:
        super().__init__(rng)
        self.spec = spec
        self.rewards, self.transitions = spec.build_tables()
        # precomputed row CDFs keep the per-step draw to one uniform
        self._cdf = np.cumsum(self.transitions, axis=2)
        self.n_actions = spec.n_actions
        self.n_states = spec.n_states
        self._state = 0
        self._t = 0

    def _reset(self) -> int:
        self._state = 0
        self._t = 0
        return self._state

    def _step(self, action: int):
        reward = float(self.rewards[self._state, action])
        row = self._cdf[self._state, action]
        self._state = int(np.searchsorted(row, self.rng.random(), side="right"))
        if self._state >= self.n_states:  # guard cumulative rounding at 1.0
            self._state = self.n_states - 1
        self._t += 1
        truncated = self._t >= self.spec.horizon
        return self._state, reward, False, truncated
