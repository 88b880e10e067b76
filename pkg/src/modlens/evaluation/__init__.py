"""Metrics and report emission."""

from .metrics import (
    MetricError,
    RationaleReport,
    RocCurve,
    accuracy,
    average_precision,
    mann_whitney_auc,
    rationale_metrics,
    roc_auc,
)
from .report import (
    DEFAULT_SALIENCY_FRACTIONS,
    classification_summary,
    evaluate_model,
    gold_subset,
    rationale_point,
    saliency_point,
    write_bundle,
)

__all__ = [
    "MetricError",
    "RationaleReport",
    "RocCurve",
    "accuracy",
    "average_precision",
    "mann_whitney_auc",
    "rationale_metrics",
    "roc_auc",
    "DEFAULT_SALIENCY_FRACTIONS",
    "classification_summary",
    "evaluate_model",
    "gold_subset",
    "rationale_point",
    "saliency_point",
    "write_bundle",
]
