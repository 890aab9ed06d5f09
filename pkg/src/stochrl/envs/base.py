"""Common environment interface.

All native environments share a gym-like contract: ``reset() -> state``,
``step(action) -> (next_state, reward, terminated, truncated)``.  Stepping
a finished episode without reset is an error.  Each instance owns its RNG
and is deterministic under (seed, action sequence).
"""

from __future__ import annotations

import numpy as np


class Env:
    """Base class holding the bookkeeping every native env shares."""

    n_actions: int

    def __init__(self, rng: np.random.Generator | int | None = None) -> None:
        self.rng = rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)
        self._needs_reset = True

    # subclasses implement _reset() -> state and _step(action) -> 4-tuple

    def reset(self):
        self._needs_reset = False
        return self._reset()

    def step(self, action: int):
        if self._needs_reset:
            raise RuntimeError("episode is over; call reset() before step()")
        if not 0 <= action < self.n_actions:
            raise ValueError(f"action {action} out of range [0, {self.n_actions})")
        state, reward, terminated, truncated = self._step(int(action))
        if terminated or truncated:
            self._needs_reset = True
        return state, reward, terminated, truncated

    def _reset(self):
        raise NotImplementedError

    def _step(self, action: int):
        raise NotImplementedError
