"""Bounded FIFO replay buffer.

Capacity is deliberately tiny, 2*ceil(log2 n), matching the stochastic
batch size of ceil(log2 n): the buffer is a short sliding window, not a
long-term store, which keeps every training step sub-linear in n.
"""

from __future__ import annotations

from collections import deque
from typing import NamedTuple

import numpy as np


class Transition(NamedTuple):
    state: np.ndarray
    action: int
    action_features: np.ndarray
    reward: float
    next_state: np.ndarray
    terminated: bool


class ReplayBuffer:
    def __init__(self, capacity: int) -> None:
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self._items: deque[Transition] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._items)

    def push(self, transition: Transition) -> None:
        self._items.append(transition)

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Transition]:
        """Uniform batch without replacement from current contents."""
        if batch_size > len(self._items):
            raise ValueError(f"cannot sample {batch_size} from {len(self._items)} transitions")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in idx]

    def actions(self) -> list[int]:
        """Stored action ids, oldest first (the global-memory pool)."""
        return [t.action for t in self._items]
