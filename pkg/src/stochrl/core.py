"""Sub-linear stochastic maximization primitives.

Maximizing a value function over n actions costs Theta(n) per call, which
dominates the per-step cost of value-based agents on large action spaces.
The operators here search a small candidate set C = R u M instead: R is a
uniformly drawn k-subset of the action space (k = ceil(log2 n) by default)
and M holds a handful of recently exploited actions.  stoch_max over C
never exceeds the exact max and matches it whenever C happens to cover an
argmax.

A value oracle is any callable ``values(state, actions) -> array`` that
returns one value per requested action id.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "ActionMemory",
    "CandidateSet",
    "SubsetSampler",
    "build_candidates",
    "candidate_cap",
    "default_subset_size",
    "stoch_argmax",
    "stoch_max",
]

ValueOracle = Callable[[object, np.ndarray], np.ndarray]


def default_subset_size(n: int) -> int:
    """ceil(log2 n), clamped to 1 so that n = 1 still yields a sample."""
    if n < 1:
        raise ValueError(f"action count must be positive, got {n}")
    return max(1, math.ceil(math.log2(n)))


def candidate_cap(n: int, k: int) -> int:
    """Upper bound on |C|: twice the default subset size.

    The cap never truncates the random subset itself, so configurations
    with k above the default (up to k = n) remain valid.
    """
    return max(2 * default_subset_size(n), k)


def _as_rng(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass
class SubsetSampler:
    """Uniform sampler of k-subsets of {0, ..., n-1}.

    Uses Floyd's algorithm, keeping each draw O(k) in time and memory so
    the sampler stays sub-linear even for very large n.  Identical seeds
    give identical draw sequences.
    """

    n: int
    k: int | None = None
    rng: np.random.Generator | int | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"action count must be positive, got {self.n}")
        if self.k is None:
            self.k = default_subset_size(self.n)
        if not 1 <= self.k <= self.n:
            raise ValueError(f"subset size must be in [1, {self.n}], got {self.k}")
        self.rng = _as_rng(self.rng)

    def sample(self) -> np.ndarray:
        """Draw one uniform k-subset, returned as distinct action ids."""
        n, k = self.n, self.k
        if k == n:
            return np.arange(n, dtype=np.int64)
        uniforms = self.rng.random(k)
        chosen: set[int] = set()
        out = np.empty(k, dtype=np.int64)
        base = n - k
        for i in range(k):
            j = base + i
            t = int(uniforms[i] * (j + 1))
            if t in chosen:
                t = j
            chosen.add(t)
            out[i] = t
        return out

    def sample_matrix(self, trials: int) -> np.ndarray:
        """Draw ``trials`` independent k-subsets as a (trials, k) matrix.

        Vectorized variant of :meth:`sample` (same algorithm, trials run
        in lockstep) for statistical verification at large trial counts.
        """
        if trials < 1:
            raise ValueError(f"trials must be positive, got {trials}")
        n, k = self.n, self.k
        if k == n:
            return np.broadcast_to(np.arange(n, dtype=np.int64), (trials, n)).copy()
        out = np.empty((trials, k), dtype=np.int64)
        for i, j in enumerate(range(n - k, n)):
            t = (self.rng.random(trials) * (j + 1)).astype(np.int64)
            if i:
                dup = (out[:, :i] == t[:, None]).any(axis=1)
                t = np.where(dup, j, t)
            out[:, i] = t
        return out


@dataclass
class ActionMemory:
    """Recently exploited actions, the second leg of the candidate set.

    mode "per-state"
        Keeps the most recently exploited distinct actions per state
        (``capacity`` of them, newest first).  Discrete states only.
    mode "global"
        States never repeat (continuous), so recall instead samples
        ``sample_size`` entries from an external pool of stored actions,
        typically the replay buffer's action column.
    mode "none"
        Always empty; candidates reduce to the random subset.
    """

    mode: str
    capacity: int = 2
    sample_size: int | None = None
    pool: Callable[[], Sequence[int]] | None = None
    rng: np.random.Generator | int | None = None
    _slots: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.mode not in ("per-state", "global", "none"):
            raise ValueError(f"unknown memory mode {self.mode!r}")
        if self.mode == "per-state" and self.capacity < 1:
            raise ValueError("per-state capacity must be at least 1")
        if self.mode == "global":
            if self.pool is None or self.sample_size is None:
                raise ValueError("global memory needs a pool and a sample_size")
        self.rng = _as_rng(self.rng)

    def record(self, state, action: int) -> None:
        """Note an exploited (greedy) action; exploratory picks stay out."""
        if self.mode != "per-state":
            return
        slot = self._slots.get(state)
        if slot is None:
            self._slots[state] = [action]
            return
        if action in slot:
            slot.remove(action)
        slot.insert(0, action)
        del slot[self.capacity :]

    def recall(self, state, rng: np.random.Generator | None = None) -> np.ndarray:
        """Return remembered action ids for this state (possibly empty).

        ``rng`` overrides the memory's own stream; diagnostics use this so
        their draws never perturb training randomness.
        """
        if self.mode == "none":
            return np.empty(0, dtype=np.int64)
        if self.mode == "per-state":
            return np.asarray(self._slots.get(state, ()), dtype=np.int64)
        stored = self.pool()
        m = min(self.sample_size, len(stored))
        if m == 0:
            return np.empty(0, dtype=np.int64)
        gen = rng if rng is not None else self.rng
        idx = gen.choice(len(stored), size=m, replace=False)
        return np.asarray([stored[i] for i in idx], dtype=np.int64)


@dataclass(frozen=True)
class CandidateSet:
    """Ordered, duplicate-free action ids to maximize over (the set C)."""

    actions: np.ndarray

    def __post_init__(self) -> None:
        acts = np.asarray(self.actions, dtype=np.int64)
        if acts.ndim != 1 or acts.size == 0:
            raise ValueError("candidate set must hold at least one action")
        if np.unique(acts).size != acts.size:
            raise ValueError("candidate set must not contain duplicates")
        object.__setattr__(self, "actions", acts)

    def __len__(self) -> int:
        return self.actions.size

    def __iter__(self):
        return iter(self.actions.tolist())

    @classmethod
    def _trusted(cls, actions: np.ndarray) -> "CandidateSet":
        # hot-path constructor for callers that guarantee the invariants
        obj = object.__new__(cls)
        object.__setattr__(obj, "actions", actions)
        return obj


def build_candidates(
    sampler: SubsetSampler,
    memory: ActionMemory | None,
    state,
    rng: np.random.Generator | None = None,
) -> CandidateSet:
    """Form C = R u M with duplicates removed, capped at 2*ceil(log2 n).

    R always survives intact; only memory extras are dropped once the cap
    is hit (oldest first, since recall lists newest first).
    """
    subset = sampler.sample()
    if memory is None or memory.mode == "none":
        return CandidateSet._trusted(subset)
    recalled = memory.recall(state, rng=rng)
    if recalled.size == 0:
        return CandidateSet._trusted(subset)
    cap = candidate_cap(sampler.n, sampler.k)
    seen = set(subset.tolist())
    combined = subset.tolist()
    for action in recalled.tolist():
        if len(combined) >= cap:
            break
        if action not in seen:
            seen.add(action)
            combined.append(action)
    return CandidateSet._trusted(np.asarray(combined, dtype=np.int64))


def stoch_max(values: ValueOracle, state, candidates: CandidateSet) -> float:
    """Maximum of the oracle over the candidate set; <= the exact max."""
    vals = np.asarray(values(state, candidates.actions), dtype=np.float64)
    if vals.size == 0:
        raise ValueError("cannot maximize over an empty candidate set")
    return float(vals.max())


def stoch_argmax(values: ValueOracle, state, candidates: CandidateSet) -> int:
    """Candidate attaining stoch_max; ties break to the lowest action id."""
    vals = np.asarray(values(state, candidates.actions), dtype=np.float64)
    if vals.size == 0:
        raise ValueError("cannot maximize over an empty candidate set")
    best = vals.max()
    return int(candidates.actions[vals == best].min())
