"""Scenario configuration, batch execution, reports and the CLI."""
from .config import Batch, Scenario, load_batch, parse_batch, parse_scenario
from .report import VerificationReport, emit_plot_data, reports_to_csv, reports_to_json
from .runner import run_batch, run_scenario

__all__ = [
    "Batch", "Scenario", "load_batch", "parse_batch", "parse_scenario", "VerificationReport",
    "emit_plot_data", "reports_to_csv", "reports_to_json", "run_batch", "run_scenario",
]
