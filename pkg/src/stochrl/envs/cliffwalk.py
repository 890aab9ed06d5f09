"""4x12 cliff-walking gridworld.

Start bottom-left, goal bottom-right, cliff along the bottom row between
them.  Every move costs -1; walking into the cliff costs -100 and
teleports back to the start without ending the episode; reaching the goal
terminates.  Transitions are deterministic and walls clamp.
"""

from __future__ import annotations

from .base import Env

ROWS, COLS = 4, 12
UP, RIGHT, DOWN, LEFT = 0, 1, 2, 3
_MOVES = {UP: (-1, 0), RIGHT: (0, 1), DOWN: (1, 0), LEFT: (0, -1)}

START = (ROWS - 1) * COLS
GOAL = ROWS * COLS - 1
CLIFF = frozenset((ROWS - 1) * COLS + c for c in range(1, COLS - 1))


class CliffWalking(Env):
    n_actions = 4
    n_states = ROWS * COLS

    def __init__(self, max_episode_steps: int | None = None, rng=None) -> None:
        super().__init__(rng)
        self.max_episode_steps = max_episode_steps
        self._state = START
        self._t = 0

    def _reset(self) -> int:
        self._state = START
        self._t = 0
        return self._state

    def _step(self, action: int):
        row, col = divmod(self._state, COLS)
        dr, dc = _MOVES[action]
        row = min(max(row + dr, 0), ROWS - 1)
        col = min(max(col + dc, 0), COLS - 1)
        nxt = row * COLS + col
        self._t += 1
        truncated = self.max_episode_steps is not None and self._t >= self.max_episode_steps
        if nxt in CLIFF:
            self._state = START
            return self._state, -100.0, False, truncated
        self._state = nxt
        if nxt == GOAL:
            return nxt, -1.0, True, False
        return nxt, -1.0, False, truncated
