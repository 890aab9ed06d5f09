"""Index <-> physical-value mapping for discretized continuous actions.

Each of d action dimensions is split into i equally spaced values between
its bounds (endpoints included), giving n = i**d discrete actions.  Codes
are row-major: the last dimension varies fastest, matching C array order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DiscretizedActionMap:
    granularity: int
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.granularity < 2:
            raise ValueError(f"granularity must be at least 2, got {self.granularity}")
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("bounds must be non-empty and of equal length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("each lower bound must be below its upper bound")

    @property
    def dims(self) -> int:
        return len(self.lower)

    @property
    def n_actions(self) -> int:
        return self.granularity**self.dims

    def decode(self, index: int) -> np.ndarray:
        """Physical values for an action index (row-major digit expansion)."""
        if not 0 <= index < self.n_actions:
            raise ValueError(f"index {index} out of range [0, {self.n_actions})")
        i = self.granularity
        digits = np.empty(self.dims, dtype=np.int64)
        rest = index
        for d in range(self.dims - 1, -1, -1):
            digits[d] = rest % i
            rest //= i
        lower = np.asarray(self.lower)
        upper = np.asarray(self.upper)
        return lower + digits * (upper - lower) / (i - 1)

    def encode(self, digits) -> int:
        """Inverse of the digit expansion inside :meth:`decode`."""
        digits = np.asarray(digits, dtype=np.int64)
        if digits.shape != (self.dims,):
            raise ValueError(f"expected {self.dims} digits, got shape {digits.shape}")
        if ((digits < 0) | (digits >= self.granularity)).any():
            raise ValueError("digit out of range")
        index = 0
        for d in digits:
            index = index * self.granularity + int(d)
        return index

    def decode_scaled(self, index: int) -> np.ndarray:
        """Decoded values rescaled to [-1, 1] per dimension (network input)."""
        lower = np.asarray(self.lower)
        upper = np.asarray(self.upper)
        return 2.0 * (self.decode(index) - lower) / (upper - lower) - 1.0

    def table_scaled(self) -> np.ndarray:
        """(n, d) matrix of all scaled action features, row-major order."""
        i = self.granularity
        axes = [np.linspace(-1.0, 1.0, i) for _ in range(self.dims)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)
