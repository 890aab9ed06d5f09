"""Cart-pole balance task with a finely discretized 1-D force.

Native stand-in for a physics-engine inverted pendulum: a pole balances on
a cart driven by a horizontal force in [-3, 3] N, discretized into
``granularity`` equally spaced magnitudes.  Classic cart-pole dynamics
integrated with semi-implicit Euler at dt = 0.02 s.  Reward is +1 per step
upright; the episode ends when the pole tips past 0.2 rad or the cart
drifts past 1 m, and truncates after 1000 steps.
"""

from __future__ import annotations

import math

import numpy as np

from .actionmap import DiscretizedActionMap
from .base import Env

GRAVITY = 9.81
CART_MASS = 1.0
POLE_MASS = 0.1
POLE_LENGTH = 0.6  # pivot to centre of mass
FORCE_LIMIT = 3.0
DT = 0.02
ANGLE_LIMIT = 0.2
POSITION_LIMIT = 1.0
MAX_STEPS = 1000
RESET_NOISE = 0.05


class CartPoleBalance(Env):
    state_dim = 4  # cart position, cart velocity, pole angle, angular velocity

    def __init__(self, granularity: int = 512, rng=None) -> None:
        if granularity < 2:
            raise ValueError(f"granularity must be at least 2, got {granularity}")
        super().__init__(rng)
        self.action_map = DiscretizedActionMap(
            granularity=granularity, lower=(-FORCE_LIMIT,), upper=(FORCE_LIMIT,)
        )
        self.n_actions = self.action_map.n_actions
        self._state = np.zeros(4)
        self._t = 0

    def _reset(self) -> np.ndarray:
        self._state = self.rng.uniform(-RESET_NOISE, RESET_NOISE, size=4)
        self._t = 0
        return self._state.copy()

    def _step(self, action: int):
        force = float(self.action_map.decode(action)[0])
        self._state = step_physics(self._state, force)
        self._t += 1
        x, _, theta, _ = self._state
        terminated = abs(theta) > ANGLE_LIMIT or abs(x) > POSITION_LIMIT
        truncated = not terminated and self._t >= MAX_STEPS
        return self._state.copy(), 1.0, terminated, truncated


def step_physics(state: np.ndarray, force: float) -> np.ndarray:
    """One semi-implicit Euler step of the classic cart-pole equations."""
    x, x_dot, theta, theta_dot = state
    total_mass = CART_MASS + POLE_MASS
    sin_t = math.sin(theta)
    cos_t = math.cos(theta)
    temp = (force + POLE_MASS * POLE_LENGTH * theta_dot**2 * sin_t) / total_mass
    theta_acc = (GRAVITY * sin_t - cos_t * temp) / (
        POLE_LENGTH * (4.0 / 3.0 - POLE_MASS * cos_t**2 / total_mass)
    )
    x_acc = temp - POLE_MASS * POLE_LENGTH * theta_acc * cos_t / total_mass
    x_dot = x_dot + DT * x_acc
    x = x + DT * x_dot
    theta_dot = theta_dot + DT * theta_acc
    theta = theta + DT * theta_dot
    return np.array([x, x_dot, theta, theta_dot])
