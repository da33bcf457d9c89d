"""Pinned comparison scenarios, parameter-count checks and the trial runner."""

from .params import ParamRow, format_param_table, k_format, param_table
from .runner import CSV_HEADER, BenchAssertionError, BenchResult, TrialRow, check_params, run
from .scenarios import (
    registry,
    scenario_depth_sweep,
    scenario_same_budget,
    scenario_same_target,
    scenario_shallow,
    scenario_sweeps,
)
from .specs import Bound, DECAY_GRID, ExperimentSpec, ModelSpec

__all__ = [
    "ParamRow", "format_param_table", "k_format", "param_table", "CSV_HEADER",
    "BenchAssertionError", "BenchResult", "TrialRow", "check_params", "run", "registry",
    "scenario_depth_sweep", "scenario_same_budget", "scenario_same_target", "scenario_shallow",
    "scenario_sweeps", "Bound", "DECAY_GRID", "ExperimentSpec", "ModelSpec",
]
