"""Run configuration: strict parsing, JSON round-trip, env/agent factories.

The config file is a single JSON document::

    {
      "env":   {"name": "frozen-lake", "slippery": true},
      "agent": {"variant": "stoch-q", "gamma": 0.95},
      "run":   {"steps": 10000, "seeds": [0, 1], "out_dir": "runs/demo"}
    }

Unknown keys are rejected everywhere so silent typos cannot change an
experiment.  parse(serialize(config)) is the identity on valid configs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..approx.agent import DeepAgentConfig
from ..envs import CartPoleBalance, CliffWalking, FrozenLake, GeneratedMdp, GeneratedMdpSpec
from ..tabular import TabularAgentConfig


class ConfigError(ValueError):
    """Invalid configuration; the CLI maps this to exit code 2."""


TABULAR_VARIANTS = {
    "q": ("q", False),
    "stoch-q": ("q", True),
    "double-q": ("double-q", False),
    "stoch-double-q": ("double-q", True),
    "sarsa": ("sarsa", False),
    "stoch-sarsa": ("sarsa", True),
}
DEEP_VARIANTS = {
    "dqn": ("dqn", False),
    "stoch-dqn": ("dqn", True),
    "ddqn": ("ddqn", False),
    "stoch-ddqn": ("ddqn", True),
}

ENV_KEYS = {
    "generated-mdp": {"n_states", "n_actions", "reward_mean", "reward_std", "horizon", "seed"},
    "cliff-walking": {"max_episode_steps"},
    "frozen-lake": {"slippery", "max_episode_steps"},
    "pendulum": {"granularity"},
}
TABULAR_AGENT_KEYS = {"variant", "gamma", "lr_exponent", "k", "memory", "memory_capacity", "epsilon"}
DEEP_AGENT_KEYS = {
    "variant",
    "gamma",
    "lr",
    "epsilon_init",
    "epsilon_decay",
    "epsilon_floor",
    "tau",
    "k",
    "memory",
    "hidden",
}
RUN_KEYS = {"steps", "seeds", "out_dir", "record_timing", "metrics", "checkpoint_every"}


@dataclass
class RunConfig:
    env: dict
    agent: dict
    steps: int
    seeds: list[int] | None = None  # None: 10 repetitions tabular, 5 deep
    out_dir: str = "runs"
    record_timing: bool = False
    metrics: bool = True
    checkpoint_every: int = 0

    def __post_init__(self) -> None:
        self.env = dict(self.env)
        self.agent = dict(self.agent)
        name = self.env.get("name")
        if name not in ENV_KEYS:
            raise ConfigError(f"unknown env {name!r}; expected one of {sorted(ENV_KEYS)}")
        extra = set(self.env) - ENV_KEYS[name] - {"name"}
        if extra:
            raise ConfigError(f"unknown env keys for {name}: {sorted(extra)}")
        variant = self.agent.get("variant")
        if variant in TABULAR_VARIANTS:
            allowed = TABULAR_AGENT_KEYS
        elif variant in DEEP_VARIANTS:
            allowed = DEEP_AGENT_KEYS
        else:
            raise ConfigError(
                f"unknown variant {variant!r}; expected one of "
                f"{sorted(TABULAR_VARIANTS) + sorted(DEEP_VARIANTS)}"
            )
        extra = set(self.agent) - allowed
        if extra:
            raise ConfigError(f"unknown agent keys for {variant}: {sorted(extra)}")
        if self.steps < 1:
            raise ConfigError(f"steps must be positive, got {self.steps}")
        if self.seeds is None:
            self.seeds = list(range(5 if variant in DEEP_VARIANTS else 10))
        if not self.seeds:
            raise ConfigError("seeds list must not be empty")
        self.seeds = [int(s) for s in self.seeds]
        if self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be non-negative")

    @property
    def variant(self) -> str:
        return self.agent["variant"]

    @property
    def is_deep(self) -> bool:
        return self.variant in DEEP_VARIANTS

    def to_dict(self) -> dict:
        return {
            "env": dict(self.env),
            "agent": dict(self.agent),
            "run": {
                "steps": self.steps,
                "seeds": list(self.seeds),
                "out_dir": self.out_dir,
                "record_timing": self.record_timing,
                "metrics": self.metrics,
                "checkpoint_every": self.checkpoint_every,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        extra = set(data) - {"env", "agent", "run"}
        if extra:
            raise ConfigError(f"unknown top-level keys: {sorted(extra)}")
        for section in ("env", "agent", "run"):
            if section not in data or not isinstance(data[section], dict):
                raise ConfigError(f"config needs an object-valued {section!r} section")
        run = dict(data["run"])
        extra = set(run) - RUN_KEYS
        if extra:
            raise ConfigError(f"unknown run keys: {sorted(extra)}")
        if "steps" not in run:
            raise ConfigError("run.steps is required")
        seeds = run.get("seeds")
        try:
            return cls(
                env=data["env"],
                agent=data["agent"],
                steps=int(run["steps"]),
                seeds=list(seeds) if seeds is not None else None,
                out_dir=str(run.get("out_dir", "runs")),
                record_timing=bool(run.get("record_timing", False)),
                metrics=bool(run.get("metrics", True)),
                checkpoint_every=int(run.get("checkpoint_every", 0)),
            )
        except ValueError as err:
            raise ConfigError(str(err)) from err

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from err
        return cls.from_dict(data)

    def to_file(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def make_env(env_spec: dict, rng: np.random.Generator):
    params = {k: v for k, v in env_spec.items() if k != "name"}
    name = env_spec["name"]
    try:
        if name == "generated-mdp":
            return GeneratedMdp(GeneratedMdpSpec(**params), rng=rng)
        if name == "cliff-walking":
            return CliffWalking(**params, rng=rng)
        if name == "frozen-lake":
            return FrozenLake(**params, rng=rng)
        if name == "pendulum":
            return CartPoleBalance(**params, rng=rng)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"invalid parameters for env {name}: {err}") from err
    raise ConfigError(f"unknown env {name!r}")


def make_tabular_config(agent_spec: dict) -> TabularAgentConfig:
    algorithm, stochastic = TABULAR_VARIANTS[agent_spec["variant"]]
    kwargs = {k: v for k, v in agent_spec.items() if k not in ("variant", "memory")}
    if "memory" in agent_spec:
        kwargs["memory_mode"] = agent_spec["memory"]
    try:
        return TabularAgentConfig(algorithm=algorithm, stochastic=stochastic, **kwargs)
    except ValueError as err:
        raise ConfigError(str(err)) from err


def make_deep_config(agent_spec: dict) -> DeepAgentConfig:
    algorithm, stochastic = DEEP_VARIANTS[agent_spec["variant"]]
    kwargs = {k: v for k, v in agent_spec.items() if k not in ("variant", "memory")}
    if "memory" in agent_spec:
        kwargs["memory_mode"] = agent_spec["memory"]
    if "hidden" in kwargs:
        kwargs["hidden"] = tuple(kwargs["hidden"])
    try:
        return DeepAgentConfig(algorithm=algorithm, stochastic=stochastic, **kwargs)
    except ValueError as err:
        raise ConfigError(str(err)) from err
