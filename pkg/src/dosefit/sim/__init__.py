"""Simulation laboratory: scenarios, the Monte Carlo engine, and metrics."""

from .config import ConfigError, load_config, scenarios_from_config
from .engine import ScenarioReport, run_scenario
from .experiments import consistency_experiment, variance_scaling_experiment
from .metrics import EstimatorRuns, MethodMetrics, ScenarioMetrics, scenario_metrics
from .report import (
    format_asmse_tables,
    read_rows_csv,
    report_rows,
    run_grid,
    summary_from_rows,
    write_experiment_csv,
    write_rows_csv,
    write_summary_json,
)
from .scenarios import (
    DESIGNS,
    TRUE_THETA,
    Scenario,
    allocate,
    build_grid,
    candidate_models,
)

__all__ = [
    "ConfigError",
    "DESIGNS",
    "EstimatorRuns",
    "MethodMetrics",
    "Scenario",
    "ScenarioMetrics",
    "ScenarioReport",
    "TRUE_THETA",
    "allocate",
    "build_grid",
    "candidate_models",
    "consistency_experiment",
    "format_asmse_tables",
    "load_config",
    "read_rows_csv",
    "report_rows",
    "run_grid",
    "run_scenario",
    "scenario_metrics",
    "scenarios_from_config",
    "summary_from_rows",
    "variance_scaling_experiment",
    "write_experiment_csv",
    "write_rows_csv",
    "write_summary_json",
]
