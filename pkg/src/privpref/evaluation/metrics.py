"""Multiclass classification metrics over the fixed Allow/Deny/Ask order."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import CLASSES, N_CLASSES, PrivacyChoice
from ..errors import LengthMismatch


def confusion_matrix(truth: Sequence[PrivacyChoice], predicted: Sequence[PrivacyChoice]) -> np.ndarray:
    """Rows are true classes, columns predicted classes."""
    if len(truth) != len(predicted):
        raise LengthMismatch(f"{len(truth)} labels vs {len(predicted)} predictions")
    cm = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(truth, predicted):
        cm[t.index, p.index] += 1
    return cm


def _ratio(num: float, den: float) -> float:
    return float(num / den) if den else 0.0


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    macro_recall: float
    macro_precision: float
    macro_f1: float
    recall: tuple[float, ...]
    precision: tuple[float, ...]
    f1: tuple[float, ...]
    confusion: np.ndarray

    @property
    def total(self) -> int:
        return int(self.confusion.sum())

    def to_json(self) -> dict:
        per_class = {
            c.token: {"recall": self.recall[c.index], "precision": self.precision[c.index],
                      "f1": self.f1[c.index]}
            for c in CLASSES
        }
        return {
            "accuracy": self.accuracy,
            "macro_recall": self.macro_recall,
            "macro_precision": self.macro_precision,
            "macro_f1": self.macro_f1,
            "per_class": per_class,
            "confusion": self.confusion.tolist(),
        }


def metrics_from_confusion(cm: np.ndarray) -> Metrics:
    cm = np.asarray(cm, dtype=np.int64)
    total = int(cm.sum())
    recall, precision, f1 = [], [], []
    for i in range(N_CLASSES):
        tp = int(cm[i, i])
        r = _ratio(tp, int(cm[i, :].sum()))
        p = _ratio(tp, int(cm[:, i].sum()))
        recall.append(r)
        precision.append(p)
        f1.append(_ratio(2 * p * r, p + r))
    return Metrics(
        accuracy=_ratio(int(np.trace(cm)), total),
        macro_recall=sum(recall) / N_CLASSES,
        macro_precision=sum(precision) / N_CLASSES,
        macro_f1=sum(f1) / N_CLASSES,
        recall=tuple(recall), precision=tuple(precision), f1=tuple(f1),
        confusion=cm,
    )


def compute_metrics(truth: Sequence[PrivacyChoice], predicted: Sequence[PrivacyChoice]) -> Metrics:
    if len(truth) != len(predicted):
        raise LengthMismatch(f"{len(truth)} labels vs {len(predicted)} predictions")
    if not truth:
        raise LengthMismatch("need at least one prediction")
    return metrics_from_confusion(confusion_matrix(truth, predicted))


def mean_metrics(parts: Sequence[Metrics]) -> dict:
    """Unweighted mean of the headline rates across folds."""
    keys = ("accuracy", "macro_recall", "macro_precision", "macro_f1")
    return {k: float(sum(getattr(m, k) for m in parts) / len(parts)) for k in keys}
