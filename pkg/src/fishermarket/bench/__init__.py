"""Benchmark harness: experiment runner and report emission."""

from .experiment import (
    ExperimentConfig,
    ExperimentSummary,
    SummaryRow,
    instance_seed,
    run_experiment,
    run_solver,
)
from .report import emit_report

__all__ = [
    "ExperimentConfig",
    "ExperimentSummary",
    "SummaryRow",
    "emit_report",
    "instance_seed",
    "run_experiment",
    "run_solver",
]
