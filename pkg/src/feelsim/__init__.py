"""Federated edge learning over a Poisson cellular network.

Closed-form performance bounds and a Monte Carlo simulator for
over-the-air (analog) and subcarrier-hopping (digital) gradient uplinks,
plus a CLI harness (``feelsim``) and a self-validation check registry.
"""

from .analytics import (
    InfeasibleCriterionError,
    NetworkConfig,
    TaskSpec,
    activation_stats,
    analog_bound,
    build_bound_report,
    digital_bound,
    high_mobility_bound,
    interference_effect,
    latency_report,
    per_round_latency,
    successful_device_stats,
)
from .learning import (
    LearningTask,
    aggregate_digital,
    analog_uplink,
    make_logistic_task,
    make_quadratic_task,
)
from .simulator import (
    RoundOutcome,
    TrialRecord,
    rounds_to_target,
    run_spatial_experiment,
    run_trial,
)

__version__ = "0.1.0"

__all__ = [
    "InfeasibleCriterionError",
    "NetworkConfig",
    "TaskSpec",
    "LearningTask",
    "RoundOutcome",
    "TrialRecord",
    "activation_stats",
    "aggregate_digital",
    "analog_bound",
    "analog_uplink",
    "build_bound_report",
    "digital_bound",
    "high_mobility_bound",
    "interference_effect",
    "latency_report",
    "make_logistic_task",
    "make_quadratic_task",
    "per_round_latency",
    "rounds_to_target",
    "run_spatial_experiment",
    "run_trial",
    "successful_device_stats",
]
