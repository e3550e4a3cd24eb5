from .power import RailState, power_budget_check, supply
from .simworld import BASE_DT, SimWorld, module_params_from_config
from .experiments import (
    EXPERIMENT_NAMES,
    ExperimentRecord,
    compute_configuration_metrics,
    compute_pendulum_metrics,
    compute_transparency_metrics,
    recompute_metrics,
    run_configuration_experiment,
    run_pendulum_voltage_experiment,
    run_transparency_experiment,
)
from .logio import read_record, write_record
from .live import LiveRobot

__all__ = [
    "BASE_DT",
    "EXPERIMENT_NAMES",
    "ExperimentRecord",
    "LiveRobot",
    "RailState",
    "SimWorld",
    "compute_configuration_metrics",
    "compute_pendulum_metrics",
    "compute_transparency_metrics",
    "module_params_from_config",
    "power_budget_check",
    "read_record",
    "recompute_metrics",
    "run_configuration_experiment",
    "run_pendulum_voltage_experiment",
    "run_transparency_experiment",
    "supply",
    "write_record",
]
