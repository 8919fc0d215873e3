from .experiment import (
    ExperimentConfig,
    ResultRecord,
    append_results,
    read_results,
    read_trace,
    run_experiment,
)
from .metrics import ard, best_hits, summary_lines, table_from_records
from .render import render_svg, render_svg_text

__all__ = [
    "ExperimentConfig", "ResultRecord", "append_results", "read_results", "read_trace",
    "run_experiment", "ard", "best_hits", "summary_lines", "table_from_records",
    "render_svg", "render_svg_text",
]
