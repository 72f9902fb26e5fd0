"""Evaluation suite: confusion partitioning, rate metrics, Brier score and
probability-band tabulation."""

import json
from dataclasses import dataclass, field

import numpy as np


class MetricError(ValueError):
    pass


@dataclass
class OutcomePartition:
    """Disjoint row_id lists for the four prediction outcomes."""

    tp: list[int] = field(default_factory=list)
    tn: list[int] = field(default_factory=list)
    fp: list[int] = field(default_factory=list)
    fn: list[int] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {"tp": len(self.tp), "tn": len(self.tn), "fp": len(self.fp), "fn": len(self.fn)}

    def total(self) -> int:
        return sum(self.counts().values())

    def group_of(self, row_id: int) -> str:
        for name in ("tp", "tn", "fp", "fn"):
            if row_id in getattr(self, name):
                return name
        raise KeyError(f"row_id {row_id} not in partition")


@dataclass
class MetricReport:
    """Rates are stored as fractions in [0, 1]; undefined ratios are None.

    Percent formatting happens only at the serialization boundary.
    """

    accuracy: float
    precision: float | None
    recall: float | None
    f1: float | None
    fpr: float | None
    fnr: float | None
    brier: float | None
    counts: dict[str, int]

    COLUMNS = ("FPR", "FNR", "Precision", "Recall", "F1-Score", "Accuracy", "Brier Score")

    def to_dict(self) -> dict:
        def pct(x):
            return None if x is None else round(100.0 * x, 4)

        return {
            "FPR": pct(self.fpr),
            "FNR": pct(self.fnr),
            "Precision": pct(self.precision),
            "Recall": pct(self.recall),
            "F1-Score": pct(self.f1),
            "Accuracy": pct(self.accuracy),
            "Brier Score": None if self.brier is None else round(self.brier, 6),
            "counts": self.counts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_text(self) -> str:
        vals = self.to_dict()
        cells = ["-" if vals[c] is None else f"{vals[c]:.4f}" for c in self.COLUMNS]
        widths = [max(len(c), len(v)) for c, v in zip(self.COLUMNS, cells)]
        head = " | ".join(c.ljust(w) for c, w in zip(self.COLUMNS, widths))
        body = " | ".join(v.rjust(w) for v, w in zip(cells, widths))
        return head + "\n" + body


def partition_outcomes(predictions, truths, row_ids) -> OutcomePartition:
    predictions = np.asarray(predictions)
    truths = np.asarray(truths)
    row_ids = np.asarray(row_ids)
    if not (len(predictions) == len(truths) == len(row_ids)):
        raise MetricError("length mismatch between predictions, truths and row_ids")
    part = OutcomePartition()
    part.tp = [int(r) for r in row_ids[(predictions == 1) & (truths == 1)]]
    part.tn = [int(r) for r in row_ids[(predictions == 0) & (truths == 0)]]
    part.fp = [int(r) for r in row_ids[(predictions == 1) & (truths == 0)]]
    part.fn = [int(r) for r in row_ids[(predictions == 0) & (truths == 1)]]
    return part


def brier_score(probs, truths) -> float:
    """Mean squared difference between forecast probability and 0/1 outcome."""
    probs = np.asarray(probs, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.float64)
    if len(probs) == 0:
        raise MetricError("empty input")
    if len(probs) != len(truths):
        raise MetricError("length mismatch")
    if np.any((probs < 0.0) | (probs > 1.0)):
        raise MetricError("probability outside [0, 1]")
    return float(np.mean((probs - truths) ** 2))


def _ratio(num: int, den: int) -> float | None:
    return None if den == 0 else num / den


def summarize(partition: OutcomePartition, brier: float | None = None) -> MetricReport:
    """Rate metrics from a partition. Zero-denominator ratios come out None
    ("absent"), never silently 0."""
    c = partition.counts()
    n = partition.total()
    if n == 0:
        raise MetricError("empty partition")
    tp, tn, fp, fn = c["tp"], c["tn"], c["fp"], c["fn"]
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = None
    else:
        f1 = 2.0 * precision * recall / (precision + recall)
    return MetricReport(
        accuracy=(tp + tn) / n,
        precision=precision,
        recall=recall,
        f1=f1,
        fpr=_ratio(fp, fp + tn),
        fnr=_ratio(fn, fn + tp),
        brier=brier,
        counts=c,
    )


def predicted_class_confidence(prob: float, predicted_label: int) -> float:
    """Confidence of the predicted class: p when predicted 1, else 1 - p."""
    return prob if predicted_label == 1 else 1.0 - prob


def probability_bands(probs_by_row: dict[int, float], partition: OutcomePartition,
                      thresholds) -> dict[str, dict[float, float]]:
    """For each outcome group and threshold t, the percentage of members
    whose predicted-class confidence is >= t.

    The statistic follows the predicted label: attack predictions (TP, FP)
    score p, benign predictions (TN, FN) score 1 - p. Empty groups are
    absent from the result.
    """
    thresholds = list(thresholds)
    if any(not 0.0 < t < 1.0 for t in thresholds):
        raise MetricError("thresholds must lie in (0, 1)")
    if sorted(thresholds) != thresholds:
        raise MetricError("thresholds must be sorted ascending")
    out: dict[str, dict[float, float]] = {}
    for group, predicted in (("TP", 1), ("TN", 0), ("FP", 1), ("FN", 0)):
        members = getattr(partition, group.lower())
        if not members:
            continue
        conf = np.array(
            [predicted_class_confidence(probs_by_row[r], predicted) for r in members]
        )
        out[group] = {t: float(100.0 * np.mean(conf >= t)) for t in thresholds}
    return out
