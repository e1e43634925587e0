"""Confusion matrices and the accuracy / precision / recall / F-measure family."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .labels import CLASSES, N_CLASSES


@dataclass(frozen=True)
class ConfusionMatrix:
    """Counts with rows = predicted class and columns = actual class."""

    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    def one_vs_rest(self, c: int) -> tuple[int, int, int, int]:
        """``(tp, tn, fp, fn)`` treating class ``c`` as positive."""
        tp = int(self.counts[c, c])
        fp = int(self.counts[c, :].sum()) - tp
        fn = int(self.counts[:, c].sum()) - tp
        tn = self.total - tp - fp - fn
        return tp, tn, fp, fn

    def to_csv(self, path: str | Path, classes: Sequence[str] = CLASSES) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["predicted\\actual"] + list(classes))
            for name, row in zip(classes, self.counts):
                w.writerow([name] + [int(v) for v in row])


def confusion(actual, predicted, n_classes: int = N_CLASSES) -> ConfusionMatrix:
    actual = np.asarray(actual, dtype=np.int64)
    predicted = np.asarray(predicted, dtype=np.int64)
    if actual.shape != predicted.shape:
        raise ValueError(f"length mismatch: {len(actual)} actual vs {len(predicted)} predicted")
    if actual.size == 0:
        raise ValueError("cannot tabulate an empty label vector")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (predicted, actual), 1)
    return ConfusionMatrix(counts)


@dataclass(frozen=True)
class EvalMetrics:
    accuracy: float
    precision: float
    recall: float
    f_measure: float
    averaging: str = "macro"
    zero_division: bool = False

    def as_percentages(self) -> tuple[str, str, str, str]:
        return tuple(f"{100 * v:.2f}" for v in (self.accuracy, self.precision, self.recall, self.f_measure))

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f_measure": self.f_measure,
            "averaging": self.averaging,
            "zero_division": self.zero_division,
        }


def _ratio(num: float, den: float) -> tuple[float, bool]:
    return (num / den, False) if den else (0.0, True)


def f_measure(precision: float, recall: float) -> float:
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def binary_metrics(tp: int, tn: int, fp: int, fn: int) -> EvalMetrics:
    """Two-class accuracy, recall, precision and F-measure from raw counts."""
    total = tp + tn + fp + fn
    if total <= 0:
        raise ValueError("no observations")
    recall, z1 = _ratio(tp, tp + fn)
    precision, z2 = _ratio(tp, tp + fp)
    return EvalMetrics(
        accuracy=(tp + tn) / total,
        precision=precision,
        recall=recall,
        f_measure=f_measure(precision, recall),
        averaging="binary",
        zero_division=z1 or z2,
    )


def metrics(cm: ConfusionMatrix) -> EvalMetrics:
    """Global accuracy plus macro-averaged one-vs-rest precision and recall.

    F-measure is taken on the macro pair. A class whose precision or recall
    has a zero denominator contributes 0 and sets ``zero_division``.
    """
    total = cm.total
    if total <= 0:
        raise ValueError("confusion matrix is empty")
    precisions, recalls, flagged = [], [], False
    for c in range(cm.n_classes):
        tp, _, fp, fn = cm.one_vs_rest(c)
        p, zp = _ratio(tp, tp + fp)
        r, zr = _ratio(tp, tp + fn)
        precisions.append(p)
        recalls.append(r)
        flagged = flagged or zp or zr
    precision = sum(precisions) / cm.n_classes
    recall = sum(recalls) / cm.n_classes
    return EvalMetrics(
        accuracy=int(np.trace(cm.counts)) / total,
        precision=precision,
        recall=recall,
        f_measure=f_measure(precision, recall),
        averaging="macro",
        zero_division=flagged,
    )


def accuracy(actual, predicted) -> float:
    actual = np.asarray(actual)
    predicted = np.asarray(predicted)
    if actual.size == 0:
        raise ValueError("no observations")
    return int((actual == predicted).sum()) / actual.size
