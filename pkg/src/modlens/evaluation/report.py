"""Evaluation report bundle: metrics, curve series, files, figures.

The bundle is plain data plus, when an output directory is given, a set
of diffable artifacts: metrics.json, roc.csv (fpr,tpr),
highlight_series.csv (selected_fraction,precision,method), report.jsonl
(one record per line), and rendered roc.png / highlights.png figures.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Mapping

import numpy as np

from ..models.classifier import ClassifierModel
from ..rationale import JointModel, greedy_rationale, saliency_scores, select_top_k
from ..text import Comment
from .metrics import (
    MetricError,
    RationaleReport,
    accuracy,
    average_precision,
    rationale_metrics,
    roc_auc,
)

DEFAULT_SALIENCY_FRACTIONS = (0.05, 0.1, 0.15, 0.2, 0.3, 0.5)


def classification_summary(classifier: ClassifierModel,
                           comments: list[Comment]) -> tuple[dict, list[tuple[float, float]]]:
    """Accuracy / AUC / AP plus the ROC points."""
    labels = np.array([c.label_index for c in comments])
    probs = classifier.predict_proba(comments)
    roc = roc_auc(probs, labels)
    return ({
        "accuracy": accuracy((probs >= 0.5).astype(int), labels),
        "auc": roc.auc,
        "average_precision": average_precision(probs, labels),
        "count": len(comments),
    }, list(roc.points))


def gold_subset(comments: list[Comment]) -> list[Comment]:
    return [c for c in comments if c.gold_spans]


def rationale_point(joint: JointModel, gold: list[Comment]) -> tuple[RationaleReport, list[np.ndarray]]:
    """Greedy selections and their pooled metrics on annotated comments."""
    zs = [np.array(greedy_rationale(joint, c.tokens).z, dtype=np.float64) for c in gold]
    return rationale_metrics(zs, [c.gold_spans for c in gold]), zs


def saliency_point(classifier: ClassifierModel, gold: list[Comment],
                   fraction: float) -> RationaleReport:
    """Saliency baseline at a fixed per-comment selected fraction.

    Each comment gets round(fraction * K) picks (at least one), the
    matched-length protocol the rationale is compared against.
    """
    zs = []
    for c in gold:
        k = max(1, int(round(fraction * len(c.tokens))))
        zs.append(select_top_k(saliency_scores(classifier, c.tokens), k))
    return rationale_metrics(zs, [c.gold_spans for c in gold])


def _series_row(method: str, report: RationaleReport) -> dict:
    return {
        "method": method,
        "selected_fraction": report.selected_fraction,
        "precision": report.precision,
        "mean_segment_length": report.mean_segment_length,
    }


def evaluate_model(classifier: ClassifierModel,
                   joints: JointModel | Mapping[str, JointModel] | None,
                   test: list[Comment], *,
                   saliency_fractions=DEFAULT_SALIENCY_FRACTIONS,
                   out_dir: str | Path | None = None) -> dict:
    """Full report over a test split; writes the bundle when out_dir is set.

    ``joints`` may be a single model or a name -> model mapping (one row
    per setting in the highlight series). Rationale evaluation needs
    gold-annotated comments in the split.
    """
    if not test:
        raise MetricError("empty test split")
    summary, roc_points = classification_summary(classifier, test)
    report: dict = {"classification": summary, "roc": roc_points, "series": []}

    named: dict[str, JointModel] = {}
    if isinstance(joints, JointModel):
        named = {"rationale": joints}
    elif joints:
        named = {f"rationale:{name}": model for name, model in joints.items()}

    if named:
        gold = gold_subset(test)
        if not gold:
            raise MetricError("rationale evaluation needs gold-annotated comments")
        matched_fractions = set()
        for method, joint in sorted(named.items()):
            point, _ = rationale_point(joint, gold)
            report["series"].append(_series_row(method, point))
            matched_fractions.add(round(point.selected_fraction, 6))
        for fraction in sorted(set(saliency_fractions) | matched_fractions):
            point = saliency_point(classifier, gold, fraction)
            report["series"].append(_series_row(f"saliency@{fraction:g}", point))
        report["gold_count"] = len(gold)

    if out_dir is not None:
        write_bundle(Path(out_dir), report)
    return report


def write_bundle(out_dir: Path, report: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "metrics.json").write_text(
        json.dumps(report["classification"], indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    with open(out_dir / "roc.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fpr", "tpr"])
        writer.writerows(report["roc"])
    with open(out_dir / "highlight_series.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["selected_fraction", "precision", "method"])
        for row in report["series"]:
            writer.writerow([row["selected_fraction"], row["precision"],
                             row["method"].split("@")[0]])
    with open(out_dir / "report.jsonl", "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"kind": "classification", **report["classification"]},
                            sort_keys=True) + "\n")
        for row in report["series"]:
            fh.write(json.dumps({"kind": "highlight_point", **row}, sort_keys=True) + "\n")
    _render_figures(out_dir, report)


def _render_figures(out_dir: Path, report: dict) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    xs = [p[0] for p in report["roc"]]
    ys = [p[1] for p in report["roc"]]
    ax.plot(xs, ys, label=f"AUC = {report['classification']['auc']:.4f}")
    ax.plot([0, 1], [0, 1], linestyle=":", color="gray")
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(out_dir / "roc.png", dpi=120)
    plt.close(fig)

    if report["series"]:
        fig, ax = plt.subplots(figsize=(5, 4))
        by_method: dict[str, list[tuple[float, float]]] = {}
        for row in report["series"]:
            if row["precision"] is None:
                continue
            base = row["method"].split("@")[0]
            by_method.setdefault(base, []).append(
                (row["selected_fraction"], row["precision"]))
        for method, pts in sorted(by_method.items()):
            pts.sort()
            marker = "o" if method.startswith("rationale") else "x"
            ax.plot([p[0] for p in pts], [p[1] for p in pts],
                    marker=marker, label=method)
        ax.set_xlabel("selected fraction")
        ax.set_ylabel("precision")
        ax.set_ylim(0.0, 1.05)
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(out_dir / "highlights.png", dpi=120)
        plt.close(fig)
