"""Scenario orchestration, the five evaluation metrics, and report emission."""

from .metrics import (
    METRIC_ORDER,
    ConfusionCounts,
    MetricSet,
    aggregate,
    compute_metrics,
)
from .runner import (
    FoldResult,
    SampleLoader,
    ScenarioReport,
    config_fingerprint,
    run_scenario,
)
from .report import emit_csv, emit_markdown, emit_report, emit_run_record, run_record

__all__ = [
    "METRIC_ORDER",
    "ConfusionCounts",
    "MetricSet",
    "aggregate",
    "compute_metrics",
    "FoldResult",
    "SampleLoader",
    "ScenarioReport",
    "config_fingerprint",
    "run_scenario",
    "emit_csv",
    "emit_markdown",
    "emit_report",
    "emit_run_record",
    "run_record",
]
