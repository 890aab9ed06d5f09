"""Experiment runners: seeded training loops that emit curve files.

Each seed gets its own environment and agent wired to dedicated RNG
streams.  Per-step diagnostics (estimation error beta, similarity ratio
omega) are computed from the candidate set the policy actually used on
greedy steps, and from a dedicated diagnostics stream otherwise, so
turning metrics on or off never changes a trajectory.
"""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..analysis import MetricsRecord
from ..approx.agent import DeepAgent
from ..approx.mlp import MlpParams
from ..core import SubsetSampler, build_candidates
from ..tabular import TabularAgent, exploration_rate
from .config import ConfigError, RunConfig, make_deep_config, make_env, make_tabular_config
from .metrics import smooth, write_curve
from .seeds import stream_rng

TABULAR_SMOOTHING_WINDOW = 1000
DEEP_SMOOTHING_WINDOW = 100
CHECKPOINT_FORMAT = "stochrl-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class SeedResult:
    seed: int
    final_cumulative: float
    tail_reward: float
    episodes: int
    greedy_return: float | None = None
    curve_path: str | None = None
    checkpoint_path: str | None = None


@dataclass
class RunResult:
    variant: str
    seed_results: list[SeedResult] = field(default_factory=list)
    summary_path: str | None = None
    manifest_path: str | None = None


def make_tabular_agent(config: RunConfig, n_states: int, n_actions: int, seed: int) -> TabularAgent:
    agent_config = make_tabular_config(config.agent)
    return TabularAgent(
        n_states,
        n_actions,
        agent_config,
        explore_rng=stream_rng(seed, "explore"),
        select_seed=stream_rng(seed, "select"),
        update_seed=stream_rng(seed, "update"),
        coin_rng=stream_rng(seed, "coin"),
    )


def make_deep_agent(config: RunConfig, env, seed: int) -> DeepAgent:
    agent_config = make_deep_config(config.agent)
    return DeepAgent(
        state_dim=env.state_dim,
        feature_table=env.action_map.table_scaled(),
        config=agent_config,
        init_rng=stream_rng(seed, "init"),
        explore_rng=stream_rng(seed, "explore"),
        select_rng=stream_rng(seed, "select"),
        update_rng=stream_rng(seed, "update"),
        batch_rng=stream_rng(seed, "batch"),
        memory_rng=stream_rng(seed, "memory"),
    )


class _Diagnostics:
    """Per-step beta/omega against the values the policy maximizes."""

    def __init__(self, stochastic: bool, n_actions: int, k: int | None, seed: int) -> None:
        self.stochastic = stochastic
        self.n_actions = n_actions
        if stochastic:
            rng = stream_rng(seed, "diag")
            self.sampler = SubsetSampler(n_actions, k, rng)
            self.rng = rng
        else:
            self.sampler = None
            self.rng = None

    def measure(self, values_row: np.ndarray, selection, memory) -> tuple[float, float | None, int]:
        full_max = float(values_row.max())
        if not self.stochastic:
            beta = 0.0
            size = self.n_actions
        else:
            if selection.greedy and selection.candidates is not None:
                cand = selection.candidates.actions
            else:
                cand = build_candidates(self.sampler, memory, None, rng=self.rng).actions
            beta = full_max - float(values_row[cand].max())
            size = int(cand.size)
        omega = (full_max - beta) / full_max if full_max > 0 else None
        return beta, omega, size


def run_tabular(config: RunConfig) -> RunResult:
    """Train the configured tabular variant over all seeds; emit curves."""
    if config.is_deep:
        raise ConfigError(f"run-tabular cannot drive deep variant {config.variant!r}")
    if config.env["name"] == "pendulum":
        raise ConfigError("run-tabular needs a discrete-state env")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = RunResult(variant=config.variant)
    for seed in config.seeds:
        env = make_env(config.env, stream_rng(seed, "env"))
        agent = make_tabular_agent(config, env.n_states, env.n_actions, seed)
        records, episodes, cumulative = tabular_loop(
            env,
            agent,
            config.steps,
            collect_metrics=config.metrics,
            record_timing=config.record_timing,
            diag_seed=seed,
        )
        curve_path = None
        tail = float("nan")
        if config.metrics:
            curve_path = out / f"curve_{config.variant}_seed{seed}.csv"
            write_curve(curve_path, records)
            rewards = np.array([r.reward for r in records])
            tail = float(smooth(rewards, TABULAR_SMOOTHING_WINDOW)[-1])
        greedy_env = make_env(config.env, stream_rng(seed, "env"))
        greedy_return = evaluate_greedy(greedy_env, agent)
        result.seed_results.append(
            SeedResult(
                seed=seed,
                final_cumulative=cumulative,
                tail_reward=tail,
                episodes=episodes,
                greedy_return=greedy_return,
                curve_path=str(curve_path) if curve_path else None,
            )
        )
    _write_run_outputs(config, result, out)
    return result


def tabular_loop(
    env,
    agent: TabularAgent,
    steps: int,
    collect_metrics: bool = False,
    record_timing: bool = False,
    diag_seed: int = 0,
) -> tuple[list[MetricsRecord], int, float]:
    """Drive one tabular agent for ``steps`` env interactions."""
    cfg = agent.config
    diag = None
    if collect_metrics:
        diag = _Diagnostics(cfg.stochastic, agent.n_actions, cfg.k, diag_seed)
    records: list[MetricsRecord] = []
    state = env.reset()
    episode = 0
    cumulative = 0.0
    pending = agent.select(state) if agent.on_policy else None
    for step in range(steps):
        t0 = time.perf_counter_ns() if record_timing else 0
        selection = pending if agent.on_policy else agent.select(state)
        if collect_metrics:
            # metrics reflect the Q values the policy saw, pre-update
            eps = cfg.epsilon if cfg.epsilon is not None else float(
                exploration_rate(agent.q.state_visits[state])
            )
            beta, omega, size = diag.measure(agent.policy_values(state), selection, agent.memory)
        next_state, reward, terminated, truncated = env.step(selection.action)
        if agent.on_policy:
            if terminated:
                agent.update(state, selection.action, reward, next_state, True, next_action=0)
            else:
                pending = agent.select(next_state)
                agent.update(
                    state, selection.action, reward, next_state, False, next_action=pending.action
                )
        else:
            agent.update(state, selection.action, reward, next_state, terminated)
        elapsed = time.perf_counter_ns() - t0 if record_timing else 0
        cumulative += reward
        if collect_metrics:
            records.append(
                MetricsRecord(
                    step=step,
                    episode=episode,
                    reward=float(reward),
                    cumulative_reward=cumulative,
                    epsilon=float(eps),
                    beta=beta,
                    omega=omega,
                    wall_time_ns=max(elapsed, 1) if record_timing else 0,
                    candidates=size,
                )
            )
        if terminated or truncated:
            state = env.reset()
            episode += 1
            if agent.on_policy:
                pending = agent.select(state)
        else:
            state = next_state
    return records, episode, cumulative


def evaluate_greedy(env, agent, max_steps: int = 1000) -> float:
    """Return of the greedy policy from reset (no exploration, no learning)."""
    state = env.reset()
    total = 0.0
    for _ in range(max_steps):
        state, reward, terminated, truncated = env.step(agent.greedy_action(state))
        total += reward
        if terminated or truncated:
            break
    return total


def run_deep(config: RunConfig) -> RunResult:
    """Train the configured deep variant over all seeds; emit curves and checkpoints."""
    if not config.is_deep:
        raise ConfigError(f"run-deep cannot drive tabular variant {config.variant!r}")
    if config.env["name"] != "pendulum":
        raise ConfigError("run-deep needs an env with action features (pendulum)")
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    result = RunResult(variant=config.variant)
    for seed in config.seeds:
        env = make_env(config.env, stream_rng(seed, "env"))
        agent = make_deep_agent(config, env, seed)
        records, episodes, cumulative = deep_loop(
            env,
            agent,
            config.steps,
            collect_metrics=config.metrics,
            record_timing=config.record_timing,
            diag_seed=seed,
            checkpoint_every=config.checkpoint_every,
            checkpoint_path=out / f"checkpoint_{config.variant}_seed{seed}.json",
            variant=config.variant,
        )
        curve_path = None
        tail = float("nan")
        if config.metrics:
            curve_path = out / f"curve_{config.variant}_seed{seed}.csv"
            write_curve(curve_path, records)
            rewards = np.array([r.reward for r in records])
            tail = float(smooth(rewards, DEEP_SMOOTHING_WINDOW)[-1])
        checkpoint_path = out / f"checkpoint_{config.variant}_seed{seed}.json"
        save_checkpoint(checkpoint_path, agent, config.variant, config.steps, episodes)
        result.seed_results.append(
            SeedResult(
                seed=seed,
                final_cumulative=cumulative,
                tail_reward=tail,
                episodes=episodes,
                curve_path=str(curve_path) if curve_path else None,
                checkpoint_path=str(checkpoint_path),
            )
        )
    _write_run_outputs(config, result, out)
    return result


def deep_loop(
    env,
    agent: DeepAgent,
    steps: int,
    collect_metrics: bool = False,
    record_timing: bool = False,
    diag_seed: int = 0,
    checkpoint_every: int = 0,
    checkpoint_path=None,
    variant: str = "",
) -> tuple[list[MetricsRecord], int, float]:
    """Drive one deep agent for ``steps`` env interactions."""
    cfg = agent.config
    diag = None
    if collect_metrics:
        diag = _Diagnostics(cfg.stochastic, agent.n_actions, agent.k, diag_seed)
    records: list[MetricsRecord] = []
    state = env.reset()
    episode = 0
    cumulative = 0.0
    all_actions = np.arange(agent.n_actions)
    for step in range(steps):
        if collect_metrics:
            # score the full action set before the step so beta/omega
            # describe the values the policy actually maximized over
            values_row = agent.value(state, all_actions)
        next_state, info = agent.train_step(env, state)
        cumulative += info.reward
        if collect_metrics:
            beta, omega, size = diag.measure(values_row, info, agent.memory)
            wall = info.select_ns + info.env_ns + info.update_ns
            records.append(
                MetricsRecord(
                    step=step,
                    episode=episode,
                    reward=float(info.reward),
                    cumulative_reward=cumulative,
                    epsilon=float(agent.epsilon),
                    beta=beta,
                    omega=omega,
                    wall_time_ns=max(wall, 1) if record_timing else 0,
                    candidates=size,
                )
            )
        if checkpoint_every and checkpoint_path is not None and (step + 1) % checkpoint_every == 0:
            save_checkpoint(checkpoint_path, agent, variant, step + 1, episode)
        if info.terminated or info.truncated:
            state = env.reset()
            episode += 1
            agent.begin_episode()
        else:
            state = next_state
    return records, episode, cumulative


def _write_run_outputs(config: RunConfig, result: RunResult, out: Path) -> None:
    summary_path = out / f"summary_{config.variant}.csv"
    with open(summary_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("seed,final_cumulative,tail_reward,episodes,greedy_return\n")
        for r in result.seed_results:
            greedy = "" if r.greedy_return is None else repr(float(r.greedy_return))
            fh.write(
                f"{r.seed},{float(r.final_cumulative)!r},{float(r.tail_reward)!r},"
                f"{r.episodes},{greedy}\n"
            )
    manifest_path = out / f"manifest_{config.variant}.json"
    manifest = {
        "config": config.to_dict(),
        "curves": [r.curve_path for r in result.seed_results if r.curve_path],
        "checkpoints": [r.checkpoint_path for r in result.seed_results if r.checkpoint_path],
        "summary": str(summary_path),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    result.summary_path = str(summary_path)
    result.manifest_path = str(manifest_path)


def _encode_params(params: MlpParams) -> dict:
    return {
        "shapes": [list(w.shape) for w in params.weights],
        "weights": [base64.b64encode(w.tobytes()).decode("ascii") for w in params.weights],
        "biases": [base64.b64encode(b.tobytes()).decode("ascii") for b in params.biases],
    }


def _decode_params(blob: dict) -> MlpParams:
    weights = [
        np.frombuffer(base64.b64decode(data), dtype=np.float64).reshape(shape).copy()
        for data, shape in zip(blob["weights"], blob["shapes"])
    ]
    biases = [
        np.frombuffer(base64.b64decode(data), dtype=np.float64).copy() for data in blob["biases"]
    ]
    return MlpParams(weights, biases)


def save_checkpoint(path, agent: DeepAgent, variant: str, step: int, episode: int) -> None:
    """Versioned JSON dump of both networks, schedule position and RNG states."""
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "variant": variant,
        "step": step,
        "episode": episode,
        "episode_index": agent.episode_index,
        "online": _encode_params(agent.online),
        "target": _encode_params(agent.target),
        "rng_state": {
            "explore": agent.explore_rng.bit_generator.state,
            "batch": agent.batch_rng.bit_generator.state,
        },
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_checkpoint(path) -> dict:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    if payload.get("format") != CHECKPOINT_FORMAT or payload.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path} is not a version-{CHECKPOINT_VERSION} checkpoint")
    payload["online"] = _decode_params(payload["online"])
    payload["target"] = _decode_params(payload["target"])
    return payload
