"""Numerical verification of the stochastic-maximization theory.

Covers the estimation error beta and similarity ratio omega, the
inclusion-probability bound for uniform k-subsets, order-statistic
expectations for uniformly distributed values, hitting times of the
memory-based maximizer, and the subset-averaged Bellman operator whose
fixed point stochastic Q-learning converges to.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CandidateSet, SubsetSampler, default_subset_size

MAX_ENUMERABLE_ACTIONS = 20
_CHUNK = 100_000


class AnalysisFailure(AssertionError):
    """A verified numerical property failed its tolerance."""


@dataclass
class MetricsRecord:
    """Per-step observables emitted by the runners.

    ``omega`` is absent (None) whenever the exact max is not positive,
    where the ratio is ill-behaved; ``beta`` is always recorded.
    ``wall_time_ns`` is 0 unless timing was enabled for the run.
    """

    step: int
    episode: int
    reward: float
    cumulative_reward: float
    epsilon: float
    beta: float
    omega: float | None
    wall_time_ns: int
    candidates: int


def beta(values, state, candidates: CandidateSet, n_actions: int) -> float:
    """Estimation error: exact max over all actions minus the candidate max."""
    all_actions = np.arange(n_actions)
    full = np.asarray(values(state, all_actions), dtype=np.float64)
    restricted = np.asarray(values(state, candidates.actions), dtype=np.float64)
    return float(full.max() - restricted.max())


def omega(values, state, candidates: CandidateSet, n_actions: int) -> float:
    """Similarity ratio: candidate max divided by the exact max."""
    all_actions = np.arange(n_actions)
    full = float(np.asarray(values(state, all_actions), dtype=np.float64).max())
    if full == 0.0:
        raise ZeroDivisionError("similarity ratio undefined when the exact max is zero")
    restricted = float(np.asarray(values(state, candidates.actions), dtype=np.float64).max())
    return restricted / full


def lemma1_probability(
    n: int, k: int | None = None, trials: int = 1_000_000, seed: int | None = 0
) -> float:
    """Empirical probability that a designated action lands in the k-subset.

    For a unique optimum, the exact inclusion probability is k/n.  Raises
    :class:`AnalysisFailure` if the estimate falls more than three
    binomial standard deviations below k/n.
    """
    if trials < 10_000:
        raise ValueError(f"need at least 1e4 trials for a meaningful bound, got {trials}")
    sampler = SubsetSampler(n, k, np.random.default_rng(seed))
    k = sampler.k
    hits = 0
    remaining = trials
    while remaining > 0:
        chunk = min(_CHUNK, remaining)
        subsets = sampler.sample_matrix(chunk)
        hits += int((subsets == 0).any(axis=1).sum())
        remaining -= chunk
    empirical = hits / trials
    p = k / n
    sigma = math.sqrt(p * (1 - p) / trials)
    if empirical < p - 3 * sigma:
        raise AnalysisFailure(
            f"inclusion probability {empirical:.6f} below k/n - 3 sigma = {p - 3 * sigma:.6f}"
        )
    return empirical


def uniform_expected_max(
    n: int,
    k: int | None = None,
    value_interval: tuple[float, float] = (0.0, 100.0),
    trials: int = 100_000,
    seed: int | None = 0,
) -> float:
    """Monte-Carlo mean of the max of k uniform values on the interval.

    The closed form is high - (high - low)/(k + 1); the estimate must land
    within four standard errors of it or :class:`AnalysisFailure` raises.
    """
    low, high = value_interval
    if high <= low:
        raise ValueError("value interval must have positive width")
    if k is None:
        k = default_subset_size(n)
    if k < 1:
        raise ValueError(f"subset size must be positive, got {k}")
    rng = np.random.default_rng(seed)
    maxima = rng.uniform(low, high, size=(trials, k)).max(axis=1)
    mean = float(maxima.mean())
    expected = high - (high - low) / (k + 1)
    stderr = float(maxima.std(ddof=1)) / math.sqrt(trials)
    if abs(mean - expected) > 4 * stderr:
        raise AnalysisFailure(
            f"mean of maxima {mean:.4f} not within 4 SE ({4 * stderr:.4f}) of {expected:.4f}"
        )
    return mean


def stochmax_over_fixed_values(
    values: np.ndarray,
    k: int | None = None,
    queries: int = 10_000,
    seed: int | None = 0,
    memory_capacity: int | None = None,
) -> np.ndarray:
    """Repeated stoch_max queries against one frozen value table.

    Without memory each query maximizes over a fresh k-subset.  With
    ``memory_capacity`` set, the query's argmax is remembered (the table is
    frozen, so this is the stable-value regime) and joins later candidate
    sets, which makes the series stick at the exact max once found.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    sampler = SubsetSampler(n, k, np.random.default_rng(seed))
    if memory_capacity is None:
        subsets = sampler.sample_matrix(queries)
        return values[subsets].max(axis=1)
    remembered: list[int] = []
    out = np.empty(queries)
    for t in range(queries):
        cand = sampler.sample()
        if remembered:
            cand = np.union1d(cand, remembered)
        vals = values[cand]
        out[t] = vals.max()
        best = int(cand[np.argmax(vals)])
        if best in remembered:
            remembered.remove(best)
        remembered.insert(0, best)
        del remembered[memory_capacity:]
    return out


def hitting_times(n: int, k: int | None = None, runs: int = 1000, seed: int | None = 0) -> np.ndarray:
    """First query index (0-based) at which the k-subset covers the optimum.

    One run per element of the result; with a frozen table and a unique
    optimum this is exactly the time for beta to first reach zero, since
    memory cannot hold the optimum before the random subset finds it.
    """
    if runs < 1:
        raise ValueError(f"runs must be positive, got {runs}")
    sampler = SubsetSampler(n, k, np.random.default_rng(seed))
    positions: list[np.ndarray] = []
    collected = 0
    offset = 0
    while collected < runs:
        subsets = sampler.sample_matrix(_CHUNK)
        hit = np.flatnonzero((subsets == 0).any(axis=1)) + offset
        positions.append(hit)
        collected += hit.size
        offset += _CHUNK
    successes = np.concatenate(positions)[:runs]
    return np.diff(successes, prepend=-1) - 1


@dataclass
class PhiOperatorSpec:
    """Finite MDP tables plus the subset distribution the operator averages over.

    ``subsets`` is either ``("uniform", k)`` for the uniform distribution
    over k-subsets, or an explicit list of (subset, probability) pairs.
    Exhaustive enumeration is capped at 20 actions; beyond that use
    :func:`phi_apply_monte_carlo`.
    """

    rewards: np.ndarray
    transitions: np.ndarray
    gamma: float
    subsets: object = ("uniform", None)
    _subset_matrix: np.ndarray = field(init=False, repr=False)
    _subset_probs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.rewards = np.asarray(self.rewards, dtype=np.float64)
        self.transitions = np.asarray(self.transitions, dtype=np.float64)
        n_states, n_actions = self.rewards.shape
        if self.transitions.shape != (n_states, n_actions, n_states):
            raise ValueError("transition table shape must be (S, A, S)")
        if not np.allclose(self.transitions.sum(axis=2), 1.0, atol=1e-9):
            raise ValueError("every transition row must sum to 1")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must be in [0, 1], got {self.gamma}")
        self._subset_matrix, self._subset_probs = self._expand_subsets(n_actions)

    def _expand_subsets(self, n_actions: int) -> tuple[np.ndarray, np.ndarray]:
        if isinstance(self.subsets, tuple) and len(self.subsets) == 2 and self.subsets[0] == "uniform":
            k = self.subsets[1] or default_subset_size(n_actions)
            if n_actions > MAX_ENUMERABLE_ACTIONS:
                raise ValueError(
                    f"exhaustive enumeration capped at {MAX_ENUMERABLE_ACTIONS} actions; "
                    "use phi_apply_monte_carlo for larger spaces"
                )
            combos = np.array(list(itertools.combinations(range(n_actions), k)), dtype=np.int64)
            probs = np.full(len(combos), 1.0 / len(combos))
            return combos, probs
        rows: list[list[int]] = []
        probs_list: list[float] = []
        for subset, prob in self.subsets:
            subset = sorted(set(int(a) for a in subset))
            if not subset:
                raise ValueError("subsets must be non-empty")
            if max(subset) >= n_actions or min(subset) < 0:
                raise ValueError("subset contains an out-of-range action")
            rows.append(subset)
            probs_list.append(float(prob))
        probs = np.asarray(probs_list)
        if (probs < 0).any() or not math.isclose(probs.sum(), 1.0, rel_tol=0, abs_tol=1e-9):
            raise ValueError("subset probabilities must be non-negative and sum to 1")
        # pad ragged rows with their own first element; max is unaffected
        width = max(len(r) for r in rows)
        matrix = np.array([r + [r[0]] * (width - len(r)) for r in rows], dtype=np.int64)
        return matrix, probs

    @property
    def n_states(self) -> int:
        return self.rewards.shape[0]

    @property
    def n_actions(self) -> int:
        return self.rewards.shape[1]


def phi_apply(spec: PhiOperatorSpec, q: np.ndarray) -> np.ndarray:
    """One application of the subset-averaged optimality operator.

    (Phi q)(s, a) = sum_C P(C) sum_s' P(s'|s,a) [r(s,a) + gamma max_{b in C} q(s',b)],
    evaluated exactly over the enumerated subset distribution.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (spec.n_states, spec.n_actions):
        raise ValueError(f"q must have shape {(spec.n_states, spec.n_actions)}, got {q.shape}")
    restricted_max = q[:, spec._subset_matrix].max(axis=2)  # (S, n_subsets)
    expected_max = restricted_max @ spec._subset_probs  # (S,)
    return spec.rewards + spec.gamma * (spec.transitions @ expected_max)


def phi_apply_monte_carlo(
    spec_tables: tuple[np.ndarray, np.ndarray, float],
    q: np.ndarray,
    k: int,
    samples: int,
    seed: int | None = 0,
) -> tuple[np.ndarray, float]:
    """Monte-Carlo estimate of the operator for spaces too large to enumerate.

    Returns the estimate and the largest per-state standard error of the
    subset-max expectation term.
    """
    rewards, transitions, gamma = spec_tables
    q = np.asarray(q, dtype=np.float64)
    n_actions = q.shape[1]
    sampler = SubsetSampler(n_actions, k, np.random.default_rng(seed))
    subsets = sampler.sample_matrix(samples)
    maxes = q[:, subsets].max(axis=2)  # (S, samples)
    expected_max = maxes.mean(axis=1)
    stderr = float((maxes.std(axis=1, ddof=1) / math.sqrt(samples)).max())
    return rewards + gamma * (transitions @ expected_max), stderr


def qstar_fixed_point(
    spec: PhiOperatorSpec, tolerance: float = 1e-8, max_iters: int = 100_000
) -> np.ndarray:
    """Iterate the operator from zero until within ``tolerance`` of its fixed point.

    The stopping rule bounds the distance to the fixed point itself, not
    the step size: contraction with factor gamma gives
    ||Q_m - Q*|| <= gamma/(1 - gamma) * ||Q_{m+1} - Q_m||.
    """
    if spec.gamma >= 1.0:
        raise ValueError("fixed-point iteration requires gamma < 1")
    threshold = tolerance * (1 - spec.gamma) / spec.gamma if spec.gamma > 0 else math.inf
    q = np.zeros((spec.n_states, spec.n_actions))
    for _ in range(max_iters):
        q_next = phi_apply(spec, q)
        diff = float(np.max(np.abs(q_next - q)))
        q = q_next
        if diff < threshold:
            return q
    raise AnalysisFailure(
        f"fixed-point iteration did not converge within {max_iters} iterations"
    )


def contraction_check(spec: PhiOperatorSpec, trials: int = 1000, seed: int | None = 0) -> float:
    """Verify the sup-norm contraction on random value-table pairs.

    Draws pairs with entries uniform on [-100, 100] and asserts
    ||Phi q1 - Phi q2|| <= gamma ||q1 - q2|| + 1e-9 for every pair.
    Returns the largest observed ratio.
    """
    if trials < 100:
        raise ValueError(f"need at least 100 trials, got {trials}")
    rng = np.random.default_rng(seed)
    shape = (spec.n_states, spec.n_actions)
    worst = 0.0
    for _ in range(trials):
        q1 = rng.uniform(-100, 100, size=shape)
        q2 = rng.uniform(-100, 100, size=shape)
        num = float(np.max(np.abs(phi_apply(spec, q1) - phi_apply(spec, q2))))
        den = float(np.max(np.abs(q1 - q2)))
        if num > spec.gamma * den + 1e-9:
            raise AnalysisFailure(
                f"contraction violated: ||Phi q1 - Phi q2|| = {num} > gamma * {den}"
            )
        if den > 0:
            worst = max(worst, num / den)
    return worst


def random_mdp_tables(
    n_states: int,
    n_actions: int,
    seed: int | None = 0,
    reward_low: float = 0.0,
    reward_high: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Random frozen (rewards, transitions): uniform rewards, Dirichlet rows."""
    rng = np.random.default_rng(seed)
    rewards = rng.uniform(reward_low, reward_high, size=(n_states, n_actions))
    transitions = rng.dirichlet(np.ones(n_states), size=(n_states, n_actions))
    return rewards, transitions


def value_iteration(
    rewards: np.ndarray,
    transitions: np.ndarray,
    gamma: float,
    tolerance: float = 1e-10,
    max_iters: int = 1_000_000,
) -> np.ndarray:
    """Classical Bellman-optimality iteration (full max over all actions).

    Independent of the subset operator; used as the k = n cross-check.
    """
    if gamma >= 1.0:
        raise ValueError("value iteration requires gamma < 1")
    q = np.zeros_like(np.asarray(rewards, dtype=np.float64))
    threshold = tolerance * (1 - gamma) / gamma if gamma > 0 else math.inf
    for _ in range(max_iters):
        q_next = rewards + gamma * (transitions @ q.max(axis=1))
        diff = float(np.max(np.abs(q_next - q)))
        q = q_next
        if diff < threshold:
            return q
    raise AnalysisFailure(f"value iteration did not converge within {max_iters} iterations")
