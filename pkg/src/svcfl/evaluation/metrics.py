"""Confusion counts and the accuracy / precision / recall / F1 report."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyEvalError, ShapeError

CONDITIONS = ("raw-single-site", "fedavg", "meta-vote", "pooled-diagnostic")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def transposed(self) -> "ConfusionMatrix":
        """The same counts with class 0 treated as positive."""
        return ConfusionMatrix(tp=self.tn, fp=self.fn, fn=self.fp, tn=self.tp)


def confusion(predictions, truth) -> ConfusionMatrix:
    """Counts with class 1 as positive."""
    p = np.asarray(predictions, dtype=np.int64).ravel()
    t = np.asarray(truth, dtype=np.int64).ravel()
    if p.shape != t.shape:
        raise ShapeError(f"{len(p)} predictions for {len(t)} labels")
    if np.any((p != 0) & (p != 1)) or np.any((t != 0) & (t != 1)):
        raise ValueError("labels must be 0 or 1")
    return ConfusionMatrix(
        tp=int(np.sum((p == 1) & (t == 1))),
        fp=int(np.sum((p == 1) & (t == 0))),
        fn=int(np.sum((p == 0) & (t == 1))),
        tn=int(np.sum((p == 0) & (t == 0))),
    )


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1_positive: float
    f1_weighted: float
    n: int
    condition: str = "pooled-diagnostic"
    classifier_kind: str = "svc"
    # cell detail: the training site for raw-single-site cells, else ""
    site: str = ""
    # metrics whose denominator was zero and which were reported as 0
    degenerate: tuple = ()
    confusion: tuple = (0, 0, 0, 0)
    # overrides the Method column text when set
    method: str = ""

    def __post_init__(self):
        for name in ("accuracy", "precision", "recall", "f1_positive", "f1_weighted"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        object.__setattr__(self, "degenerate", tuple(self.degenerate))
        object.__setattr__(self, "confusion", tuple(int(c) for c in self.confusion))

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1_positive": self.f1_positive,
            "f1_weighted": self.f1_weighted,
            "n": self.n,
            "condition": self.condition,
            "classifier_kind": self.classifier_kind,
            "site": self.site,
            "degenerate": list(self.degenerate),
            "confusion": list(self.confusion),
            "method": self.method,
        }

    @classmethod
    def from_json(cls, obj) -> "MetricsReport":
        return cls(
            accuracy=float(obj["accuracy"]),
            precision=float(obj["precision"]),
            recall=float(obj["recall"]),
            f1_positive=float(obj["f1_positive"]),
            f1_weighted=float(obj["f1_weighted"]),
            n=int(obj["n"]),
            condition=obj["condition"],
            classifier_kind=obj["classifier_kind"],
            site=obj.get("site", ""),
            degenerate=tuple(obj.get("degenerate", ())),
            confusion=tuple(obj.get("confusion", (0, 0, 0, 0))),
            method=obj.get("method", ""),
        )


def _ratio(num, den, name, flags):
    if den == 0:
        flags.append(name)
        return 0.0
    return num / den


def _f1(p, r, name, flags):
    if p + r == 0:
        flags.append(name)
        return 0.0
    return 2 * p * r / (p + r)


def metrics(cm: ConfusionMatrix, condition: str = "pooled-diagnostic", classifier_kind: str = "svc", site: str = "") -> MetricsReport:
    """Report for a confusion matrix.

    A zero denominator yields 0 for that metric and records its name in
    ``degenerate``. ``f1_weighted`` is the support-weighted mean of the two
    per-class F1 scores.
    """
    n = cm.n
    if n == 0:
        raise EmptyEvalError("no evaluated records")
    flags: list = []
    precision = _ratio(cm.tp, cm.tp + cm.fp, "precision", flags)
    recall = _ratio(cm.tp, cm.tp + cm.fn, "recall", flags)
    f1_pos = _f1(precision, recall, "f1_positive", flags) if "precision" not in flags and "recall" not in flags else 0.0
    if ("precision" in flags or "recall" in flags) and "f1_positive" not in flags:
        flags.append("f1_positive")
    neg_flags: list = []
    p0 = _ratio(cm.tn, cm.tn + cm.fn, "precision_negative", neg_flags)
    r0 = _ratio(cm.tn, cm.tn + cm.fp, "recall_negative", neg_flags)
    f1_neg = _f1(p0, r0, "f1_negative", neg_flags) if not neg_flags else 0.0
    flags.extend(f for f in neg_flags if f not in flags)
    support1 = cm.tp + cm.fn
    support0 = cm.tn + cm.fp
    f1_weighted = (support1 * f1_pos + support0 * f1_neg) / n
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / n,
        precision=precision,
        recall=recall,
        f1_positive=f1_pos,
        f1_weighted=f1_weighted,
        n=n,
        condition=condition,
        classifier_kind=classifier_kind,
        site=site,
        degenerate=tuple(flags),
        confusion=(cm.tp, cm.fp, cm.fn, cm.tn),
    )


def evaluate(predictions, truth, **labels) -> MetricsReport:
    return metrics(confusion(predictions, truth), **labels)
