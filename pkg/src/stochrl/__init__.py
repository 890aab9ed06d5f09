"""stochrl: value-based RL with sub-linear stochastic maximization.

Swaps the linear-time max/argmax inside Q-learning-style agents for
maximization over a small random-plus-remembered candidate set, keeping
per-step work around O(log n) in the number of actions.  Ships tabular
and deep agent families, native benchmark environments, a numerical
verification suite for the underlying operator theory, and a CLI harness
for reproducible seeded experiments.
"""

from .analysis import (
    AnalysisFailure,
    MetricsRecord,
    PhiOperatorSpec,
    beta,
    contraction_check,
    lemma1_probability,
    omega,
    phi_apply,
    qstar_fixed_point,
    uniform_expected_max,
    value_iteration,
)
from .core import (
    ActionMemory,
    CandidateSet,
    SubsetSampler,
    build_candidates,
    default_subset_size,
    stoch_argmax,
    stoch_max,
)
from .tabular import QTable, TabularAgent, TabularAgentConfig

__version__ = "0.1.0"

__all__ = [
    "ActionMemory",
    "AnalysisFailure",
    "CandidateSet",
    "MetricsRecord",
    "PhiOperatorSpec",
    "QTable",
    "SubsetSampler",
    "TabularAgent",
    "TabularAgentConfig",
    "beta",
    "build_candidates",
    "contraction_check",
    "default_subset_size",
    "lemma1_probability",
    "omega",
    "phi_apply",
    "qstar_fixed_point",
    "stoch_argmax",
    "stoch_max",
    "uniform_expected_max",
    "value_iteration",
    "__version__",
]
