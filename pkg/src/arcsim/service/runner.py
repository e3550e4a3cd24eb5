"""Experiment execution behind the HTTP surface.

The CLI and the POST /api/experiments endpoint both call execute(); the CLI
is a thin client of this layer.
"""

from __future__ import annotations

from ..config import load_config
from ..harness import (
    run_configuration_experiment,
    run_pendulum_voltage_experiment,
    run_transparency_experiment,
)
from .models import ExperimentRequest, ExperimentResponse


def execute(req: ExperimentRequest) -> ExperimentResponse:
    config = load_config(req.config_path)
    if req.experiment == "config":
        record = run_configuration_experiment(config, req.preset, seed=req.seed)
    elif req.experiment == "transparency":
        record = run_transparency_experiment(config, seed=req.seed)
    elif req.experiment == "pendulum":
        record = run_pendulum_voltage_experiment(
            config, tuple(req.vin), seed=req.seed
        )
    else:
        raise ValueError(f"unknown experiment {req.experiment!r}")
    return ExperimentResponse(
        experiment=record.name,
        metrics=record.metrics,
        metrics_sha256=record.metrics_sha256(),
        config_snapshot=record.config_snapshot,
        series=record.series if req.include_series else None,
    )
