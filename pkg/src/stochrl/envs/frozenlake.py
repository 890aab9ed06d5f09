"""4x4 frozen-lake gridworld, optionally slippery.

Map layout (S start, F frozen, H hole, G goal)::

    S F F F
    F H F H
    F F F H
    H F F G

Reaching the goal pays 1 and terminates; falling in a hole terminates with
0.  In slippery mode each move goes in the intended direction or either
perpendicular one, each with probability 1/3.  Moves off the grid clamp.
"""

from __future__ import annotations

from .base import Env

MAP = "SFFF" "FHFH" "FFFH" "HFFG"
SIZE = 4
LEFT, DOWN, RIGHT, UP = 0, 1, 2, 3
_MOVES = {LEFT: (0, -1), DOWN: (1, 0), RIGHT: (0, 1), UP: (-1, 0)}

START = MAP.index("S")
GOAL = MAP.index("G")
HOLES = frozenset(i for i, c in enumerate(MAP) if c == "H")


class FrozenLake(Env):
    n_actions = 4
    n_states = SIZE * SIZE

    def __init__(self, slippery: bool = True, max_episode_steps: int | None = 100, rng=None) -> None:
        super().__init__(rng)
        self.slippery = slippery
        self.max_episode_steps = max_episode_steps
        self._state = START
        self._t = 0

    def _reset(self) -> int:
        self._state = START
        self._t = 0
        return self._state

    def _move(self, state: int, action: int) -> int:
        row, col = divmod(state, SIZE)
        dr, dc = _MOVES[action]
        row = min(max(row + dr, 0), SIZE - 1)
        col = min(max(col + dc, 0), SIZE - 1)
        return row * SIZE + col

    def _step(self, action: int):
        if self.slippery:
            # intended direction or either perpendicular, 1/3 each
            slip = int(self.rng.integers(0, 3))
            action = (action + (0, -1, 1)[slip]) % 4
        nxt = self._move(self._state, action)
        self._state = nxt
        self._t += 1
        if nxt == GOAL:
            return nxt, 1.0, True, False
        if nxt in HOLES:
            return nxt, 0.0, True, False
        truncated = self.max_episode_steps is not None and self._t >= self.max_episode_steps
        return nxt, 0.0, False, truncated
