"""Confusion-matrix metrics for the two-class screening task.

PBT is the positive class. Per-class precision/recall/F1 come from
swapping the positive class; the Overall column is the macro average of
the two classes. Any metric whose denominator is zero is 0 by convention,
including MCC when its radicand vanishes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .corpus import MT, PBT


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self):
        for name, value in (("tp", self.tp), ("tn", self.tn), ("fp", self.fp), ("fn", self.fn)):
            if value < 0:
                raise ValueError(f"{name} must be non-negative, got {value}")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion(pred: Sequence[str], truth: Sequence[str]) -> ConfusionMatrix:
    if len(pred) != len(truth):
        raise ValueError(f"length mismatch: {len(pred)} predictions vs {len(truth)} truths")
    if not pred:
        raise ValueError("cannot build a confusion matrix from zero examples")
    tp = tn = fp = fn = 0
    for p, t in zip(pred, truth):
        if p not in (PBT, MT) or t not in (PBT, MT):
            raise ValueError(f"labels must be {PBT!r} or {MT!r}, got ({p!r}, {t!r})")
        if p == PBT:
            if t == PBT:
                tp += 1
            else:
                fp += 1
        else:
            if t == MT:
                tn += 1
            else:
                fn += 1
    return ConfusionMatrix(tp=tp, tn=tn, fp=fp, fn=fn)


def _safe_div(num: float, den: float) -> float:
    return num / den if den != 0 else 0.0


def macro(pbt_value: float, mt_value: float) -> float:
    """The Overall column: unweighted mean of the two class values."""
    return (pbt_value + mt_value) / 2.0


@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision_pbt: float
    precision_mt: float
    recall_pbt: float
    recall_mt: float
    f1_pbt: float
    f1_mt: float
    mcc: float

    @property
    def precision_overall(self) -> float:
        return macro(self.precision_pbt, self.precision_mt)

    @property
    def recall_overall(self) -> float:
        return macro(self.recall_pbt, self.recall_mt)

    @property
    def f1_overall(self) -> float:
        return macro(self.f1_pbt, self.f1_mt)


def compute_metrics(cm: ConfusionMatrix) -> Metrics:
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    tp, tn, fp, fn = cm.tp, cm.tn, cm.fp, cm.fn
    accuracy = (tp + tn) / cm.total
    precision_pbt = _safe_div(tp, tp + fp)
    recall_pbt = _safe_div(tp, tp + fn)
    precision_mt = _safe_div(tn, tn + fn)
    recall_mt = _safe_div(tn, tn + fp)
    f1_pbt = _safe_div(2.0 * precision_pbt * recall_pbt, precision_pbt + recall_pbt)
    f1_mt = _safe_div(2.0 * precision_mt * recall_mt, precision_mt + recall_mt)
    radicand = float(tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = _safe_div(tp * tn - fp * fn, math.sqrt(radicand))
    return Metrics(
        accuracy=accuracy,
        precision_pbt=precision_pbt,
        precision_mt=precision_mt,
        recall_pbt=recall_pbt,
        recall_mt=recall_mt,
        f1_pbt=f1_pbt,
        f1_mt=f1_mt,
        mcc=mcc,
    )


def render_metrics_table(metrics: Metrics, delimiter: str = "\t") -> str:
    """Metric table with PBT / MT / Overall columns; accuracy and MCC are
    single-valued and appear only under Overall."""

    def fmt(x: float) -> str:
        return f"{x:.3f}"

    rows = [
        ("Metric", "PBT", "MT", "Overall"),
        ("Accuracy", "", "", fmt(metrics.accuracy)),
        ("Precision", fmt(metrics.precision_pbt), fmt(metrics.precision_mt), fmt(metrics.precision_overall)),
        ("Recall", fmt(metrics.recall_pbt), fmt(metrics.recall_mt), fmt(metrics.recall_overall)),
        ("F1-score", fmt(metrics.f1_pbt), fmt(metrics.f1_mt), fmt(metrics.f1_overall)),
        ("MCC", "", "", fmt(metrics.mcc)),
    ]
    return "\n".join(delimiter.join(row) for row in rows) + "\n"
