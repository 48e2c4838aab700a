"""Linear recourse bandits: joint action and feature-modification selection
under a distance budget, with optional human-expert consultation."""

from .environments import Environment, build_fertility, build_ihdp, build_synthetic
from .estimator import ArmEstimate, ConfidenceParams
from .harness import ExperimentConfig, RunLog, run, sweep
from .model import (
    BoxBudget,
    Context,
    RewardModel,
    TwoNormBudget,
    expected_reward,
    solve_cop,
)
from .ocop import AdmmParams, OcopSolution
from .policies import Decision, PolicyState, make_policy_state

__all__ = [
    "AdmmParams",
    "ArmEstimate",
    "BoxBudget",
    "ConfidenceParams",
    "Context",
    "Decision",
    "Environment",
    "ExperimentConfig",
    "OcopSolution",
    "PolicyState",
    "RewardModel",
    "RunLog",
    "TwoNormBudget",
    "build_fertility",
    "build_ihdp",
    "build_synthetic",
    "expected_reward",
    "make_policy_state",
    "run",
    "solve_cop",
    "sweep",
]

__version__ = "0.1.0"
