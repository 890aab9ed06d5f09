"""Operator theory and statistical verifications."""

import numpy as np
import pytest

from stochrl.analysis import (
    AnalysisFailure,
    PhiOperatorSpec,
    beta,
    contraction_check,
    hitting_times,
    lemma1_probability,
    omega,
    phi_apply,
    phi_apply_monte_carlo,
    qstar_fixed_point,
    random_mdp_tables,
    stochmax_over_fixed_values,
    uniform_expected_max,
    value_iteration,
)
from stochrl.core import CandidateSet


def table_oracle(row):
    row = np.asarray(row, dtype=np.float64)
    return lambda state, actions: row[actions]


# ------------------------------------------------------------- beta and omega


def test_beta_zero_on_full_cover():
    oracle = table_oracle([4.0, 2.0, 9.0])
    assert beta(oracle, 0, CandidateSet(np.arange(3)), 3) == 0.0


def test_beta_simple_gap():
    oracle = table_oracle([10.0, 7.0, 3.0])
    assert beta(oracle, 0, CandidateSet(np.array([1, 2])), 3) == pytest.approx(3.0)


def test_omega_examples_and_zero_guard():
    oracle = table_oracle([10.0, 7.0, 3.0])
    assert omega(oracle, 0, CandidateSet(np.arange(3)), 3) == pytest.approx(1.0)
    assert omega(oracle, 0, CandidateSet(np.array([1, 2])), 3) == pytest.approx(0.7)
    zero = table_oracle([0.0, -1.0])
    with pytest.raises(ZeroDivisionError):
        omega(zero, 0, CandidateSet(np.array([1])), 2)


def test_omega_beta_identity():
    # omega = 1 - beta / max whenever the exact max is positive
    rng = np.random.default_rng(3)
    for _ in range(50):
        row = rng.uniform(0.5, 10.0, size=12)
        oracle = table_oracle(row)
        cand = CandidateSet(rng.choice(12, size=4, replace=False))
        b = beta(oracle, 0, cand, 12)
        w = omega(oracle, 0, cand, 12)
        assert w == pytest.approx(1.0 - b / row.max(), abs=1e-12)
        assert b >= 0.0 and w <= 1.0


# ------------------------------------------------------- inclusion probability


def test_lemma1_full_set_is_certain():
    assert lemma1_probability(8, 8, trials=10_000, seed=0) == 1.0


def test_lemma1_matches_exact_inclusion_probability():
    empirical = lemma1_probability(256, 8, trials=1_000_000, seed=1)
    p = 8 / 256
    sigma = np.sqrt(p * (1 - p) / 1_000_000)
    assert abs(empirical - p) <= 3 * sigma


def test_lemma1_lower_bound_holds_at_default_size():
    empirical = lemma1_probability(1000, None, trials=200_000, seed=2)
    p = 10 / 1000
    sigma = np.sqrt(p * (1 - p) / 200_000)
    assert empirical >= p - 3 * sigma


def test_lemma1_rejects_tiny_trial_counts():
    with pytest.raises(ValueError):
        lemma1_probability(16, 4, trials=100, seed=0)


# --------------------------------------------------- uniform order statistics


def test_uniform_expected_max_single_draw():
    # k = 1: plain mean of one uniform, (low + high) / 2
    mean = uniform_expected_max(2, 1, (0.0, 100.0), trials=200_000, seed=3)
    assert mean == pytest.approx(50.0, abs=0.5)


def test_uniform_expected_max_worked_example():
    # interval [0, 100] with k = 10: expectation 100 - 100/11 = 90.909...
    mean = uniform_expected_max(1000, 10, (0.0, 100.0), trials=200_000, seed=4)
    assert mean == pytest.approx(100.0 - 100.0 / 11.0, abs=0.2)


def test_uniform_expected_max_validates_interval():
    with pytest.raises(ValueError):
        uniform_expected_max(8, 3, (5.0, 5.0), trials=10_000, seed=0)


def test_fixed_table_memoryless_fluctuates_below_max():
    rng = np.random.default_rng(10)
    values = rng.uniform(0, 100, size=512)
    series = stochmax_over_fixed_values(values, k=9, queries=4000, seed=5)
    assert (series <= values.max() + 1e-12).all()
    expected = 100.0 - 100.0 / 10.0
    assert series.mean() == pytest.approx(expected, abs=1.5)
    # memoryless sampling keeps missing the max now and then
    assert (series < values.max() - 1e-9).any()


def test_fixed_table_memory_reaches_max_and_stays():
    rng = np.random.default_rng(11)
    values = rng.uniform(0, 100, size=512)
    series = stochmax_over_fixed_values(values, k=9, queries=1500, seed=6, memory_capacity=2)
    hit = int(np.argmax(series >= values.max() - 1e-12))
    assert series[hit] == pytest.approx(values.max())
    assert (series[hit:] >= values.max() - 1e-12).all()


def test_hitting_times_match_geometric_mean():
    # 0-indexed first-success times of a k/n inclusion event: mean n/k - 1
    times = hitting_times(200, 8, runs=20_000, seed=7)
    expected = 200 / 8 - 1
    stderr = times.std(ddof=1) / np.sqrt(times.size)
    assert abs(times.mean() - expected) <= 4 * stderr
    assert times.min() >= 0


# ------------------------------------------------------------ the Phi operator


def test_phi_full_cover_is_bellman_backup():
    rewards, transitions = random_mdp_tables(3, 4, seed=1)
    spec = PhiOperatorSpec(rewards, transitions, 0.9, ("uniform", 4))
    rng = np.random.default_rng(2)
    q = rng.normal(size=(3, 4))
    bellman = rewards + 0.9 * (transitions @ q.max(axis=1))
    assert np.allclose(phi_apply(spec, q), bellman, atol=1e-12)


def test_phi_explicit_distribution_hand_computed():
    # one state, two actions, P({0}) = 0.4 and P({0,1}) = 0.6, gamma = 0.5:
    # (Phi q)(a) = r(a) + 0.5 * (0.4 * q0 + 0.6 * max(q0, q1))
    rewards = np.array([[1.0, 2.0]])
    transitions = np.ones((1, 2, 1))
    spec = PhiOperatorSpec(rewards, transitions, 0.5, [((0,), 0.4), ((0, 1), 0.6)])
    q = np.array([[2.0, 5.0]])
    assert np.allclose(phi_apply(spec, q), [[2.9, 3.9]])


def test_phi_single_pair_fixed_point_is_20():
    spec = PhiOperatorSpec(np.array([[1.0]]), np.ones((1, 1, 1)), 0.95, ("uniform", 1))
    q = qstar_fixed_point(spec, tolerance=1e-9)
    assert q[0, 0] == pytest.approx(20.0, abs=1e-8)


def test_phi_equal_inputs_give_zero_distance():
    rewards, transitions = random_mdp_tables(2, 3, seed=4)
    spec = PhiOperatorSpec(rewards, transitions, 0.7, ("uniform", 2))
    q = np.random.default_rng(0).normal(size=(2, 3))
    assert np.max(np.abs(phi_apply(spec, q) - phi_apply(spec, q))) == 0.0


def test_phi_monotone_in_q():
    rewards, transitions = random_mdp_tables(3, 5, seed=6)
    spec = PhiOperatorSpec(rewards, transitions, 0.9, ("uniform", 2))
    rng = np.random.default_rng(1)
    for _ in range(25):
        q1 = rng.normal(size=(3, 5))
        q2 = q1 + rng.uniform(0, 3, size=(3, 5))
        assert (phi_apply(spec, q1) <= phi_apply(spec, q2) + 1e-12).all()


def test_phi_enumeration_cap():
    rewards, transitions = random_mdp_tables(2, 21, seed=0)
    with pytest.raises(ValueError):
        PhiOperatorSpec(rewards, transitions, 0.9, ("uniform", 3))


def test_phi_monte_carlo_agrees_with_exact():
    rewards, transitions = random_mdp_tables(3, 10, seed=8)
    spec = PhiOperatorSpec(rewards, transitions, 0.9, ("uniform", 3))
    q = np.random.default_rng(5).uniform(-5, 5, size=(3, 10))
    exact = phi_apply(spec, q)
    estimate, stderr = phi_apply_monte_carlo((rewards, transitions, 0.9), q, 3, 40_000, seed=9)
    assert np.abs(estimate - exact).max() <= 5 * max(stderr, 1e-6)


def test_phi_spec_validation():
    rewards, transitions = random_mdp_tables(2, 3, seed=0)
    with pytest.raises(ValueError):
        PhiOperatorSpec(rewards, np.ones((2, 3, 2)), 0.9)  # rows not normalized
    with pytest.raises(ValueError):
        PhiOperatorSpec(rewards, transitions, 1.5)
    with pytest.raises(ValueError):
        PhiOperatorSpec(rewards, transitions, 0.9, [((0,), 0.5), ((1,), 0.4)])
    with pytest.raises(ValueError):
        PhiOperatorSpec(rewards, transitions, 0.9, [((), 1.0)])


# ------------------------------------------------------- fixed-point iteration


def test_qstar_gamma_zero_is_immediate_reward():
    rewards, transitions = random_mdp_tables(3, 4, seed=2)
    spec = PhiOperatorSpec(rewards, transitions, 0.0, ("uniform", 2))
    assert np.allclose(qstar_fixed_point(spec), rewards, atol=1e-12)


def test_qstar_full_cover_matches_value_iteration():
    rewards, transitions = random_mdp_tables(3, 5, seed=3)
    spec = PhiOperatorSpec(rewards, transitions, 0.9, ("uniform", 5))
    q = qstar_fixed_point(spec, tolerance=1e-10)
    vi = value_iteration(rewards, transitions, 0.9, tolerance=1e-12)
    assert np.abs(q - vi).max() < 1e-8


def test_qstar_monotone_in_subset_size():
    rewards, transitions = random_mdp_tables(3, 5, seed=9)
    previous = None
    for k in range(1, 6):
        spec = PhiOperatorSpec(rewards, transitions, 0.9, ("uniform", k))
        q = qstar_fixed_point(spec, tolerance=1e-10)
        if previous is not None:
            assert (q >= previous - 1e-9).all()
        previous = q


def test_qstar_is_a_fixed_point():
    rewards, transitions = random_mdp_tables(4, 4, seed=12)
    spec = PhiOperatorSpec(rewards, transitions, 0.95, ("uniform", 2))
    tol = 1e-6
    q = qstar_fixed_point(spec, tolerance=tol)
    assert np.abs(phi_apply(spec, q) - q).max() < 2 * tol


def test_qstar_requires_discounting():
    rewards, transitions = random_mdp_tables(2, 2, seed=0)
    spec = PhiOperatorSpec(rewards, transitions, 1.0, ("uniform", 1))
    with pytest.raises(ValueError):
        qstar_fixed_point(spec)


def test_qstar_flags_non_convergence():
    rewards, transitions = random_mdp_tables(2, 2, seed=0)
    spec = PhiOperatorSpec(rewards, transitions, 0.99, ("uniform", 1))
    with pytest.raises(AnalysisFailure):
        qstar_fixed_point(spec, tolerance=1e-12, max_iters=3)


# ------------------------------------------------------------------ contraction


def test_contraction_constant_shift_is_exact():
    rewards, transitions = random_mdp_tables(3, 5, seed=9)
    spec = PhiOperatorSpec(rewards, transitions, 0.9, ("uniform", 2))
    q = np.random.default_rng(3).uniform(-50, 50, size=(3, 5))
    for shift in (5.0, -12.5):
        diff = np.abs(phi_apply(spec, q + shift) - phi_apply(spec, q)).max()
        assert diff == pytest.approx(0.9 * abs(shift), abs=1e-9)


def test_contraction_gamma_zero_collapses():
    rewards, transitions = random_mdp_tables(2, 4, seed=1)
    spec = PhiOperatorSpec(rewards, transitions, 0.0, ("uniform", 2))
    assert contraction_check(spec, trials=150, seed=0) == 0.0


def test_contraction_random_pairs_below_gamma():
    rewards, transitions = random_mdp_tables(4, 6, seed=5)
    for gamma in (0.5, 0.95):
        spec = PhiOperatorSpec(rewards, transitions, gamma, ("uniform", 3))
        assert contraction_check(spec, trials=300, seed=2) <= gamma + 1e-9


def test_contraction_requires_enough_trials():
    rewards, transitions = random_mdp_tables(2, 3, seed=0)
    spec = PhiOperatorSpec(rewards, transitions, 0.9, ("uniform", 2))
    with pytest.raises(ValueError):
        contraction_check(spec, trials=10, seed=0)
