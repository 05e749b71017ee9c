"""Confusion counts and the five evaluation metrics.

Tongue-out is the positive class. Any metric whose denominator is zero gets
the undefined marker (``None``) and is excluded from aggregation with a
logged note rather than being coerced to zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyEvaluationError

log = logging.getLogger(__name__)

# Display order used by every report table.
METRIC_ORDER = ("accuracy", "specificity", "sensitivity", "f1", "precision")


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @classmethod
    def from_predictions(cls, y_true, y_pred) -> "ConfusionCounts":
        y_true = np.asarray(y_true)
        y_pred = np.asarray(y_pred)
        if y_true.shape != y_pred.shape:
            raise EmptyEvaluationError(
                f"prediction/label length mismatch: {y_pred.shape} vs {y_true.shape}"
            )
        return cls(
            tp=int(((y_true == 1) & (y_pred == 1)).sum()),
            fp=int(((y_true == 0) & (y_pred == 1)).sum()),
            tn=int(((y_true == 0) & (y_pred == 0)).sum()),
            fn=int(((y_true == 1) & (y_pred == 0)).sum()),
        )


@dataclass(frozen=True)
class MetricSet:
    accuracy: float | None
    sensitivity: float | None
    specificity: float | None
    precision: float | None
    f1: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {name: getattr(self, name) for name in METRIC_ORDER}


def compute_metrics(c: ConfusionCounts) -> MetricSet:
    """accuracy, sensitivity (recall), specificity, precision, F1.

    F1 is computed as ``2 tp / (2 tp + fp + fn)``, the single-division form
    of ``2 P S / (P + S)``; it is undefined exactly when tp is zero, which is
    also when the quotient form has a zero denominator somewhere.
    """
    if c.total == 0:
        raise EmptyEvaluationError("metrics requested over zero samples")

    def ratio(name: str, num: int, den: int) -> float | None:
        if den == 0:
            log.info("metric %s undefined (zero denominator), excluded from aggregation",
                     name)
            return None
        return num / den

    return MetricSet(
        accuracy=ratio("accuracy", c.tp + c.tn, c.total),
        sensitivity=ratio("sensitivity", c.tp, c.tp + c.fn),
        specificity=ratio("specificity", c.tn, c.tn + c.fp),
        precision=ratio("precision", c.tp, c.tp + c.fp),
        f1=ratio("f1", 2 * c.tp, 2 * c.tp + c.fp + c.fn) if c.tp > 0 else ratio("f1", 0, 0),
    )


def aggregate(metric_sets: list[MetricSet]) -> dict[str, tuple[float, float] | None]:
    """Per-metric (mean, sample std) over the defined values.

    Sample std uses the n-1 denominator and is 0.0 for a single value. A
    metric with no defined values at all aggregates to ``None``.
    """
    out: dict[str, tuple[float, float] | None] = {}
    for name in METRIC_ORDER:
        values = [getattr(m, name) for m in metric_sets if getattr(m, name) is not None]
        if not values:
            log.info("metric %s has no defined fold values; aggregate omitted", name)
            out[name] = None
            continue
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
        out[name] = (mean, std)
    return out
