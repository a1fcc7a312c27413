"""Confusion-matrix metrics and ROC curves for labeled evaluation data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from flowtriage.flows.types import ClassLabel


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass
class ClassificationReport:
    per_class: dict[ClassLabel, ClassMetrics]
    accuracy: float
    macro_precision: float
    macro_recall: float
    macro_f1: float
    weighted_precision: float
    weighted_recall: float
    weighted_f1: float
    roc: dict[ClassLabel, dict] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": {
                str(label): {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for label, m in self.per_class.items()
            },
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "weighted": {
                "precision": self.weighted_precision,
                "recall": self.weighted_recall,
                "f1": self.weighted_f1,
            },
            "roc_auc": {str(label): r["auc"] for label, r in self.roc.items()},
        }


def _safe_div(num: float, denom: float) -> float:
    return num / denom if denom else 0.0


def evaluate_classifier(
    y_true: list[ClassLabel] | np.ndarray,
    y_pred: list[ClassLabel] | np.ndarray,
    scores: dict[ClassLabel, np.ndarray] | None = None,
) -> ClassificationReport:
    """Per-class precision/recall/F1, accuracy, macro and weighted averages.

    `scores` optionally supplies per-class positive probabilities for ROC
    computation by threshold sweep.
    """
    true = np.asarray([int(l) for l in y_true], dtype=np.int64)
    pred = np.asarray([int(l) for l in y_pred], dtype=np.int64)
    if true.shape[0] == 0:
        raise ValueError("cannot evaluate on empty data")
    if true.shape != pred.shape:
        raise ValueError("prediction and label lengths differ")

    per_class: dict[ClassLabel, ClassMetrics] = {}
    for label in ClassLabel:
        c = int(label)
        tp = int(np.sum((pred == c) & (true == c)))
        fp = int(np.sum((pred == c) & (true != c)))
        fn = int(np.sum((pred != c) & (true == c)))
        precision = _safe_div(tp, tp + fp)
        recall = _safe_div(tp, tp + fn)
        f1 = _safe_div(2 * precision * recall, precision + recall)
        per_class[label] = ClassMetrics(precision, recall, f1, int(np.sum(true == c)))

    total = true.shape[0]
    supports = np.array([per_class[l].support for l in ClassLabel], dtype=np.float64)
    precisions = np.array([per_class[l].precision for l in ClassLabel])
    recalls = np.array([per_class[l].recall for l in ClassLabel])
    f1s = np.array([per_class[l].f1 for l in ClassLabel])

    report = ClassificationReport(
        per_class=per_class,
        accuracy=float(np.mean(true == pred)),
        macro_precision=float(precisions.mean()),
        macro_recall=float(recalls.mean()),
        macro_f1=float(f1s.mean()),
        weighted_precision=float((precisions * supports).sum() / total),
        weighted_recall=float((recalls * supports).sum() / total),
        weighted_f1=float((f1s * supports).sum() / total),
    )
    if scores is not None:
        for label, s in scores.items():
            fpr, tpr, thresholds = roc_points((true == int(label)).astype(int), s)
            report.roc[label] = {
                "fpr": fpr.tolist(),
                "tpr": tpr.tolist(),
                "thresholds": thresholds.tolist(),
                "auc": float(np.trapezoid(tpr, fpr)),
            }
    return report


def roc_points(
    y_true: np.ndarray, scores: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ROC curve by sweeping a threshold over the positive-class scores."""
    y = np.asarray(y_true, dtype=np.int64)
    s = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-s, kind="stable")
    y_sorted = y[order]
    s_sorted = s[order]

    # Collapse runs of equal scores to one operating point each.
    distinct = np.where(np.diff(s_sorted))[0]
    cut = np.concatenate([distinct, [y_sorted.size - 1]])

    tps = np.cumsum(y_sorted)[cut].astype(np.float64)
    fps = (cut + 1) - tps
    n_pos = max(int(y.sum()), 1)
    n_neg = max(int((1 - y).sum()), 1)

    tpr = np.concatenate([[0.0], tps / n_pos])
    fpr = np.concatenate([[0.0], fps / n_neg])
    thresholds = np.concatenate([[np.inf], s_sorted[cut]])
    return fpr, tpr, thresholds
