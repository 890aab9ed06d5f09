"""Function-approximation agents built on a hand-rolled numpy MLP."""

from .agent import DeepAgent, DeepAgentConfig, StepInfo, compute_target, epsilon_schedule
from .mlp import (
    MlpParams,
    flatten,
    forward,
    forward_batch,
    gradient,
    init_params,
    sgd_step,
    soft_update,
    unflatten,
)
from .replay import ReplayBuffer, Transition

__all__ = [
    "DeepAgent",
    "DeepAgentConfig",
    "MlpParams",
    "ReplayBuffer",
    "StepInfo",
    "Transition",
    "compute_target",
    "epsilon_schedule",
    "flatten",
    "forward",
    "forward_batch",
    "gradient",
    "init_params",
    "sgd_step",
    "soft_update",
    "unflatten",
]
