"""Deterministic report emission: markdown tables, full-precision CSV, and a
machine-readable JSON run record.

Markdown values are rounded half-up to two decimals (matching the precision
of the published result tables); CSV and JSON keep full float precision.
No timestamps anywhere: identical runs must emit identical bytes.
"""

from __future__ import annotations

import csv
import io
import json
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from .metrics import METRIC_ORDER
from .runner import ScenarioReport

COLUMN_TITLES = {
    "accuracy": "Accuracy",
    "specificity": "Specificity",
    "sensitivity": "Sensitivity",
    "f1": "F1-Score",
    "precision": "Precision",
}

UNDEFINED = "n/a"


def round2(value: float) -> str:
    return str(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


def _cell(value: float | None) -> str:
    return UNDEFINED if value is None else round2(value)


def _aggregate_cell(entry) -> str:
    if entry is None:
        return UNDEFINED
    mean, std = entry
    return f"{round2(mean)}±{round2(std)}"


def emit_markdown(report: ScenarioReport, path: str | Path) -> None:
    lines = [
        f"# Scenario {report.scenario} report"
        + (" (misc-class test set)" if report.misc_class else ""),
        "",
        f"Config fingerprint: `{report.config_fingerprint}`",
        "",
        "| Participant | " + " | ".join(COLUMN_TITLES[m] for m in METRIC_ORDER) + " |",
        "| --- |" + " --- |" * len(METRIC_ORDER),
    ]
    for fold in report.folds:
        cells = [_cell(getattr(fold.metrics, m)) for m in METRIC_ORDER]
        lines.append(
            f"| {'/'.join(fold.test_participants)} | " + " | ".join(cells) + " |"
        )
    agg = [_aggregate_cell(report.aggregates.get(m)) for m in METRIC_ORDER]
    lines.append("| mean±std | " + " | ".join(agg) + " |")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_csv(report: ScenarioReport, path: str | Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["fold_id", "test_participants"]
        + list(METRIC_ORDER)
        + ["tp", "fp", "tn", "fn", "train_size", "test_size", "best_epoch"]
    )

    def fmt(v):
        return "" if v is None else repr(v)

    for fold in report.folds:
        writer.writerow(
            [fold.fold_id, "/".join(fold.test_participants)]
            + [fmt(getattr(fold.metrics, m)) for m in METRIC_ORDER]
            + [fold.confusion.tp, fold.confusion.fp, fold.confusion.tn,
               fold.confusion.fn, fold.train_size, fold.test_size, fold.best_epoch]
        )
    for row_name, idx in (("mean", 0), ("std", 1)):
        entry = [report.aggregates.get(m) for m in METRIC_ORDER]
        writer.writerow(
            [row_name, ""]
            + [fmt(e[idx]) if e is not None else "" for e in entry]
            + [""] * 7
        )
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def run_record(report: ScenarioReport) -> dict:
    return {
        "scenario": report.scenario,
        "misc_class": report.misc_class,
        "config": report.config,
        "config_fingerprint": report.config_fingerprint,
        "folds": [
            {
                "fold_id": f.fold_id,
                "test_participants": list(f.test_participants),
                "confusion": {"tp": f.confusion.tp, "fp": f.confusion.fp,
                              "tn": f.confusion.tn, "fn": f.confusion.fn},
                "metrics": f.metrics.as_dict(),
                "train_size": f.train_size,
                "test_size": f.test_size,
                "best_epoch": f.best_epoch,
            }
            for f in report.folds
        ],
        "aggregates": {
            m: (None if report.aggregates.get(m) is None
                else {"mean": report.aggregates[m][0], "std": report.aggregates[m][1]})
            for m in METRIC_ORDER
        },
    }


def emit_run_record(report: ScenarioReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(run_record(report), sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def emit_report(report: ScenarioReport, fmt: str, path: str | Path) -> None:
    if fmt == "markdown":
        emit_markdown(report, path)
    elif fmt == "csv":
        emit_csv(report, path)
    elif fmt == "json":
        emit_run_record(report, path)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
