"""Native environments: rules, stochasticity, determinism, action maps."""

from collections import deque

import numpy as np
import pytest

from stochrl.envs import (
    CartPoleBalance,
    CliffWalking,
    DiscretizedActionMap,
    FrozenLake,
    GeneratedMdp,
    GeneratedMdpSpec,
)
from stochrl.envs import cliffwalk, frozenlake
from stochrl.envs.cartpole import step_physics


# ------------------------------------------------------------------ generated


def test_generated_mdp_tables_frozen_by_spec_seed():
    a = GeneratedMdp(GeneratedMdpSpec(seed=5))
    b = GeneratedMdp(GeneratedMdpSpec(seed=5), rng=99)
    assert np.array_equal(a.rewards, b.rewards)
    assert np.array_equal(a.transitions, b.transitions)
    c = GeneratedMdp(GeneratedMdpSpec(seed=6))
    assert not np.array_equal(a.rewards, c.rewards)


def test_generated_mdp_reward_sample_mean():
    # CLT bound: mean of 3*256 N(-50, 50^2) draws within 3 * 50/sqrt(768)
    env = GeneratedMdp(GeneratedMdpSpec())
    tolerance = 3 * 50 / np.sqrt(768)
    assert abs(env.rewards.mean() + 50.0) <= tolerance


def test_generated_mdp_transition_rows_normalized():
    env = GeneratedMdp(GeneratedMdpSpec(seed=2))
    assert np.allclose(env.transitions.sum(axis=2), 1.0, atol=1e-12)


def test_generated_mdp_truncates_at_horizon_without_terminals():
    env = GeneratedMdp(GeneratedMdpSpec(horizon=5), rng=0)
    env.reset()
    flags = [env.step(0)[2:] for _ in range(5)]
    assert all(term is False for term, _ in flags)
    assert [trunc for _, trunc in flags] == [False] * 4 + [True]


def test_step_after_episode_end_raises():
    env = GeneratedMdp(GeneratedMdpSpec(horizon=1), rng=0)
    env.reset()
    env.step(0)
    with pytest.raises(RuntimeError):
        env.step(0)


def test_action_bounds_checked():
    env = GeneratedMdp(GeneratedMdpSpec(), rng=0)
    env.reset()
    with pytest.raises(ValueError):
        env.step(256)


# ---------------------------------------------------------------- cliff walk


def bfs_optimal_return() -> float:
    """Shortest safe path length from start to goal, each move costing -1."""
    start, goal = cliffwalk.START, cliffwalk.GOAL
    seen = {start}
    frontier = deque([(start, 0)])
    while frontier:
        state, dist = frontier.popleft()
        if state == goal:
            return -float(dist)
        row, col = divmod(state, cliffwalk.COLS)
        for dr, dc in ((-1, 0), (1, 0), (0, 1), (0, -1)):
            r2 = min(max(row + dr, 0), cliffwalk.ROWS - 1)
            c2 = min(max(col + dc, 0), cliffwalk.COLS - 1)
            nxt = r2 * cliffwalk.COLS + c2
            if nxt in cliffwalk.CLIFF or nxt in seen:
                continue
            seen.add(nxt)
            frontier.append((nxt, dist + 1))
    raise AssertionError("goal unreachable")


def test_bfs_oracle_gives_minus_13():
    assert bfs_optimal_return() == -13.0


def test_cliff_optimal_path_matches_bfs():
    env = CliffWalking()
    state = env.reset()
    total = 0.0
    moves = [cliffwalk.UP] + [cliffwalk.RIGHT] * 11 + [cliffwalk.DOWN]
    for action in moves:
        state, reward, terminated, _ = env.step(action)
        total += reward
    assert terminated and total == bfs_optimal_return()


def test_cliff_wall_clamp():
    env = CliffWalking()
    state = env.reset()
    nxt, reward, terminated, truncated = env.step(cliffwalk.LEFT)  # off-grid
    assert nxt == state and reward == -1.0 and not terminated


def test_cliff_fall_teleports_to_start():
    env = CliffWalking()
    env.reset()
    # stepping right from start lands in the cliff strip
    nxt, reward, terminated, _ = env.step(cliffwalk.RIGHT)
    assert reward == -100.0 and nxt == cliffwalk.START and not terminated


def test_cliff_rewards_limited_to_rule_set():
    env = CliffWalking(rng=0)
    rng = np.random.default_rng(0)
    env.reset()
    for _ in range(2000):
        _, reward, terminated, _ = env.step(int(rng.integers(4)))
        assert reward in (-1.0, -100.0)
        if terminated:
            env.reset()


# ---------------------------------------------------------------- frozen lake


def test_frozen_lake_walk_to_goal_non_slippery():
    env = FrozenLake(slippery=False)
    env.reset()
    path = [frozenlake.RIGHT, frozenlake.RIGHT, frozenlake.DOWN, frozenlake.DOWN,
            frozenlake.DOWN, frozenlake.RIGHT]
    outcome = None
    for action in path:
        outcome = env.step(action)
    state, reward, terminated, truncated = outcome
    assert state == frozenlake.GOAL and reward == 1.0 and terminated


def test_frozen_lake_hole_terminates_with_zero():
    env = FrozenLake(slippery=False)
    env.reset()
    env.step(frozenlake.DOWN)  # (1, 0) frozen
    state, reward, terminated, _ = env.step(frozenlake.RIGHT)  # (1, 1) hole
    assert state in frozenlake.HOLES and reward == 0.0 and terminated


def test_frozen_lake_slippery_three_way_split():
    # from (0,1) moving LEFT the three outcomes are distinct cells; the
    # intended one must occur 1/3 +/- 0.01 of the time over 1e5 trials
    env = FrozenLake(slippery=True, max_episode_steps=None, rng=2024)
    trials = 100_000
    hits = {0: 0, 5: 0, 1: 0}  # left -> (0,0), down -> (1,1) hole, up clamps to (0,1)
    for _ in range(trials):
        env.reset()
        env._state = 1  # position at (0,1); reset() would start at S
        nxt, _, terminated, _ = env.step(frozenlake.LEFT)
        hits[nxt] += 1
        env._needs_reset = True
    for cell in hits:
        assert abs(hits[cell] / trials - 1 / 3) <= 0.01
    assert hits[0] + hits[5] + hits[1] == trials


def test_frozen_lake_truncates_at_limit():
    env = FrozenLake(slippery=False, max_episode_steps=3)
    env.reset()
    results = [env.step(frozenlake.UP) for _ in range(3)]  # clamped in place
    assert [r[3] for r in results] == [False, False, True]


def test_frozen_lake_trajectory_deterministic_under_seed():
    actions = np.random.default_rng(1).integers(0, 4, size=400)
    traces = []
    for _ in range(2):
        env = FrozenLake(slippery=True, rng=77)
        env.reset()
        trace = []
        for a in actions:
            state, reward, terminated, truncated = env.step(int(a))
            trace.append((state, reward))
            if terminated or truncated:
                env.reset()
        traces.append(trace)
    assert traces[0] == traces[1]


# ----------------------------------------------------------------- action map


def test_action_map_one_dim_three_levels():
    amap = DiscretizedActionMap(3, (-1.0,), (1.0,))
    assert [amap.decode(i)[0] for i in range(3)] == [-1.0, 0.0, 1.0]


@pytest.mark.parametrize("dims,granularity,n", [(2, 4, 16), (6, 4, 4096), (1, 512, 512)])
def test_action_map_counts(dims, granularity, n):
    amap = DiscretizedActionMap(granularity, (-1.0,) * dims, (1.0,) * dims)
    assert amap.n_actions == n


def test_action_map_roundtrip_exhaustive():
    amap = DiscretizedActionMap(10, (-2.0, 0.0, 1.0, -1.0), (2.0, 5.0, 3.0, 0.0))
    i = amap.granularity
    for index in range(amap.n_actions):  # 10^4 codes
        rest, digits = index, []
        for _ in range(amap.dims):
            digits.append(rest % i)
            rest //= i
        assert amap.encode(list(reversed(digits))) == index
    values0 = amap.decode(0)
    assert np.allclose(values0, amap.lower)
    assert np.allclose(amap.decode(amap.n_actions - 1), amap.upper)


def test_action_map_roundtrip_sampled_large():
    amap = DiscretizedActionMap(4, (-1.0,) * 6, (1.0,) * 6)  # 4096 actions
    rng = np.random.default_rng(0)
    for index in rng.integers(0, amap.n_actions, size=500).tolist():
        decoded = amap.decode(index)
        digits = np.round((decoded - np.asarray(amap.lower)) / (2.0 / 3.0)).astype(int)
        assert amap.encode(digits) == index


def test_action_map_errors():
    with pytest.raises(ValueError):
        DiscretizedActionMap(1, (-1.0,), (1.0,))
    amap = DiscretizedActionMap(3, (-1.0,), (1.0,))
    with pytest.raises(ValueError):
        amap.decode(3)


def test_scaled_table_row_major_order():
    amap = DiscretizedActionMap(3, (0.0, 0.0), (1.0, 1.0))
    table = amap.table_scaled()
    assert table.shape == (9, 2)
    for index in range(9):
        assert np.allclose(table[index], amap.decode_scaled(index))


# ------------------------------------------------------------------- pendulum


def test_pendulum_action_count_and_force_endpoints():
    env = CartPoleBalance(512)
    assert env.n_actions == 512
    assert env.action_map.decode(0)[0] == -3.0
    assert env.action_map.decode(511)[0] == 3.0


def test_pendulum_zero_force_keeps_equilibrium():
    state = np.zeros(4)
    for _ in range(1000):
        state = step_physics(state, 0.0)
    assert np.allclose(state, 0.0)


def test_pendulum_reward_and_termination():
    env = CartPoleBalance(3, rng=0)
    env.reset()
    steps = 0
    while True:
        _, reward, terminated, truncated = env.step(0)  # constant max-left force
        assert reward == 1.0
        steps += 1
        if terminated or truncated:
            break
    assert terminated and steps < 1000  # hard shove tips it over


def test_pendulum_truncates_at_1000():
    env = CartPoleBalance(3, rng=4)
    env._reset = lambda: np.zeros(4)  # start exactly upright
    state = env.reset()
    env._state = np.zeros(4)
    count = 0
    while True:
        _, _, terminated, truncated = env.step(1)  # zero force
        count += 1
        if terminated or truncated:
            break
    assert truncated and count == 1000


def test_pendulum_trajectory_deterministic():
    rng_actions = np.random.default_rng(8).integers(0, 3, size=50)
    states = []
    for _ in range(2):
        env = CartPoleBalance(3, rng=21)
        env.reset()
        trace = []
        for a in rng_actions:
            s, _, terminated, truncated = env.step(int(a))
            trace.append(s.copy())
            if terminated or truncated:
                env.reset()
        states.append(np.concatenate(trace))
    assert np.array_equal(states[0], states[1])


def test_pendulum_rejects_granularity_below_two():
    with pytest.raises(ValueError):
        CartPoleBalance(1)
