"""Threshold-free and thresholded classification metrics plus timing.

Ties are handled deterministically: AUC uses rank averaging (0.5 credit for
tied positive/negative pairs) and average precision orders samples by
(score descending, index ascending).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, fields

import numpy as np

from .errors import MetricError


def _as_arrays(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel().astype(np.int64)
    if s.shape != y.shape:
        raise MetricError(f"scores and labels differ in length: {s.size} vs {y.size}")
    return s, y


def auc(scores, labels):
    """Probability a random positive outranks a random negative."""
    s, y = _as_arrays(scores, labels)
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise MetricError("AUC needs both classes present")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(s.size)
    sorted_scores = s[order]
    i = 0
    while i < s.size:
        j = i
        while j < s.size and sorted_scores[j] == sorted_scores[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j - 1) + 1.0  # average 1-based rank
        i = j
    rank_sum = ranks[y == 1].sum()
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def average_precision(scores, labels):
    """Sum of precision-weighted recall increments over score prefixes."""
    s, y = _as_arrays(scores, labels)
    n_pos = int((y == 1).sum())
    if n_pos == 0:
        raise MetricError("average precision needs at least one positive")
    order = np.lexsort((np.arange(s.size), -s))  # score desc, index asc
    hits = np.cumsum(y[order] == 1)
    ks = np.arange(1, s.size + 1)
    precision = hits / ks
    recall = hits / n_pos
    prev_recall = np.concatenate([[0.0], recall[:-1]])
    return float(((recall - prev_recall) * precision).sum())


@dataclass
class ThresholdedMetrics:
    precision: float
    recall: float
    f1: float
    accuracy: float
    mcc: float
    tp: int
    fp: int
    tn: int
    fn: int


def thresholded_metrics(scores, labels, threshold):
    """Confusion-matrix metrics with positives predicted at score >= t.

    MCC returns 0 when any marginal of the confusion matrix is empty.
    """
    s, y = _as_arrays(scores, labels)
    pred = s >= threshold
    tp = int(np.sum(pred & (y == 1)))
    fp = int(np.sum(pred & (y == 0)))
    tn = int(np.sum(~pred & (y == 0)))
    fn = int(np.sum(~pred & (y == 1)))
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = (2.0 * precision * recall / (precision + recall)) if precision + recall else 0.0
    accuracy = (tp + tn) / max(tp + fp + tn + fn, 1)
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    mcc = ((tp * tn - fp * fn) / np.sqrt(float(denom))) if denom else 0.0
    return ThresholdedMetrics(precision, recall, f1, accuracy, float(mcc), tp, fp, tn, fn)


RESULT_COLUMNS = ("model", "dataset", "seed", "auc", "ap", "precision", "recall",
                  "f1", "accuracy", "mcc", "threshold", "train_s", "infer_s", "epochs")


@dataclass
class EvalReport:
    auc: float
    ap: float
    precision: float
    recall: float
    f1: float
    accuracy: float
    mcc: float
    threshold: float
    tp: int
    fp: int
    tn: int
    fn: int
    train_time_s: float = 0.0
    infer_time_s: float = 0.0
    epochs_run: int = 0

    @classmethod
    def from_scores(cls, scores, labels, threshold, train_time_s=0.0,
                    infer_time_s=0.0, epochs_run=0):
        tm = thresholded_metrics(scores, labels, threshold)
        return cls(auc=auc(scores, labels), ap=average_precision(scores, labels),
                   precision=tm.precision, recall=tm.recall, f1=tm.f1,
                   accuracy=tm.accuracy, mcc=tm.mcc, threshold=threshold,
                   tp=tm.tp, fp=tm.fp, tn=tm.tn, fn=tm.fn,
                   train_time_s=train_time_s, infer_time_s=infer_time_s,
                   epochs_run=epochs_run)

    def to_text(self):
        lines = [f"{f.name} = {getattr(self, f.name):.6g}" for f in fields(self)]
        return "\n".join(lines) + "\n"

    def to_row(self, model, dataset, seed):
        values = {
            "model": model, "dataset": dataset, "seed": seed,
            "auc": self.auc, "ap": self.ap, "precision": self.precision,
            "recall": self.recall, "f1": self.f1, "accuracy": self.accuracy,
            "mcc": self.mcc, "threshold": self.threshold,
            "train_s": self.train_time_s, "infer_s": self.infer_time_s,
            "epochs": self.epochs_run,
        }
        return ",".join(_fmt_cell(values[c]) for c in RESULT_COLUMNS)


def _fmt_cell(v):
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def timed(fn, *args, **kwargs):
    """Run fn and return (result, wall-clock seconds on a monotonic clock)."""
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start
