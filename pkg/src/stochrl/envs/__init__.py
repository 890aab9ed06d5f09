"""Native benchmark environments."""

from .actionmap import DiscretizedActionMap
from .base import Env
from .cartpole import CartPoleBalance
from .cliffwalk import CliffWalking
from .frozenlake import FrozenLake
from .generated import GeneratedMdp, GeneratedMdpSpec

__all__ = [
    "CartPoleBalance",
    "CliffWalking",
    "DiscretizedActionMap",
    "Env",
    "FrozenLake",
    "GeneratedMdp",
    "GeneratedMdpSpec",
]
