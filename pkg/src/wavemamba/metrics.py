"""Confusion-matrix accounting: per-class accuracy, OA, AA, Cohen's kappa."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMatrix, IdOutOfRange


class ConfusionMatrix:
    """K x K counts, rows = true class, columns = predicted."""

    def __init__(self, num_classes: int):
        if num_classes < 1:
            raise ValueError("need at least one class")
        self.counts = np.zeros((num_classes, num_classes), dtype=np.int64)

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accumulate(self, true: int, pred: int) -> None:
        k = self.num_classes
        if not (0 <= true < k and 0 <= pred < k):
            raise IdOutOfRange(f"ids ({true}, {pred}) outside [0, {k})")
        self.counts[true, pred] += 1

    def accumulate_many(self, true, pred) -> None:
        true = np.asarray(true, dtype=np.int64)
        pred = np.asarray(pred, dtype=np.int64)
        k = self.num_classes
        if true.size and (
            true.min() < 0 or true.max() >= k or pred.min() < 0 or pred.max() >= k
        ):
            raise IdOutOfRange(f"ids outside [0, {k})")
        np.add.at(self.counts, (true, pred), 1)

    def merge(self, other: "ConfusionMatrix") -> None:
        self.counts += other.counts


def overall_accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrix("no samples accumulated")
    return float(np.trace(cm.counts)) / cm.total


def per_class_accuracy(cm: ConfusionMatrix) -> np.ndarray:
    """Diagonal over row sums; NaN for classes with no samples."""
    if cm.total == 0:
        raise EmptyMatrix("no samples accumulated")
    row = cm.counts.sum(axis=1).astype(np.float64)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(row > 0, np.diag(cm.counts) / row, np.nan)


def average_accuracy(cm: ConfusionMatrix) -> float:
    """Mean per-class accuracy over classes present in the matrix."""
    acc = per_class_accuracy(cm)
    present = ~np.isnan(acc)
    if not present.any():
        raise EmptyMatrix("no class has samples")
    return float(acc[present].mean())


def cohens_kappa(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrix("no samples accumulated")
    total = float(cm.total)
    p_o = np.trace(cm.counts) / total
    row = cm.counts.sum(axis=1)
    col = cm.counts.sum(axis=0)
    p_e = float(np.dot(row, col)) / (total * total)
    if p_e == 1.0:
        return 1.0 if p_o == 1.0 else 0.0
    return float((p_o - p_e) / (1.0 - p_e))


@dataclass
class MetricsReport:
    oa: float
    aa: float
    kappa: float
    per_class: list[float]
    confusion: list[list[int]]
    train_time_s: float | None = None
    config: dict = field(default_factory=dict)

    @classmethod
    def from_matrix(
        cls, cm: ConfusionMatrix, train_time_s: float | None = None, config: dict | None = None
    ) -> "MetricsReport":
        acc = per_class_accuracy(cm)
        return cls(
            oa=overall_accuracy(cm),
            aa=average_accuracy(cm),
            kappa=cohens_kappa(cm),
            per_class=[None if np.isnan(a) else float(a) for a in acc],
            confusion=cm.counts.tolist(),
            train_time_s=train_time_s,
            config=config or {},
        )

    def to_json(self) -> str:
        payload = {
            "oa": self.oa,
            "aa": self.aa,
            "kappa": self.kappa,
            "per_class": self.per_class,
            "confusion": self.confusion,
            "train_time_s": self.train_time_s,
            "config": self.config,
        }
        return json.dumps(payload, indent=2, sort_keys=True)
