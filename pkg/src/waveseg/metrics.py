"""Overlap and misclassification scores against ground truth."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass
class EvalReport:
    misclassification_rate: float
    dice: float
    iou: float
    permutation: dict[int, int]
    per_class_dice: dict[int, float]

    def to_json(self) -> dict:
        return {
            "misclassification_rate": self.misclassification_rate,
            "dice": self.dice,
            "iou": self.iou,
            "permutation": {str(k): v for k, v in self.permutation.items()},
            "per_class_dice": {str(k): v for k, v in self.per_class_dice.items()},
        }


def _pair(a, b):
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionError(f"mask shapes differ: {a.shape} vs {b.shape}")
    return a, b


def dice(a, b) -> float:
    """2|a & b| / (|a| + |b|); two empty masks score 1."""
    a, b = _pair(a, b)
    s = int(a.sum()) + int(b.sum())
    if s == 0:
        return 1.0
    return 2.0 * int(np.logical_and(a, b).sum()) / s


def iou(a, b) -> float:
    a, b = _pair(a, b)
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    return int(np.logical_and(a, b).sum()) / union


def _confusion(labels, truth, C):
    return np.bincount(truth.ravel() * C + labels.ravel(), minlength=C * C).reshape(C, C)


def best_permutation(labels, truth, C: int) -> dict[int, int]:
    """Predicted-class -> truth-class map maximising agreement.

    Exhaustive for ``C <= 6``, greedy on the confusion matrix otherwise.
    """
    conf = _confusion(labels, truth, C)  # conf[t, p]
    if C <= 6:
        best, best_perm = -1, None
        for perm in itertools.permutations(range(C)):
            hits = sum(conf[perm[p], p] for p in range(C))
            if hits > best:
                best, best_perm = hits, perm
        return {p: int(best_perm[p]) for p in range(C)}
    mapping: dict[int, int] = {}
    work = conf.astype(np.int64).copy()
    for _ in range(C):
        t, p = np.unravel_index(int(np.argmax(work)), work.shape)
        mapping[int(p)] = int(t)
        work[t, :] = -1
        work[:, p] = -1
    return mapping


def misclassification(labels, truth, C: int) -> EvalReport:
    labels = np.asarray(labels, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if labels.shape != truth.shape:
        raise DimensionError(f"label shapes differ: {labels.shape} vs {truth.shape}")
    C = max(C, int(labels.max()) + 1, int(truth.max()) + 1)
    perm = best_permutation(labels, truth, C)
    mapped = np.vectorize(perm.get, otypes=[np.int64])(labels) if labels.size else labels
    rate = float(np.mean(mapped != truth))
    per_class = {k: dice(mapped == k, truth == k) for k in range(C)}
    present = [k for k in range(C) if (truth == k).any() or (mapped == k).any()]
    mean_dice = float(np.mean([per_class[k] for k in present])) if present else 1.0
    mean_iou = float(np.mean([iou(mapped == k, truth == k) for k in present])) if present else 1.0
    return EvalReport(rate, mean_dice, mean_iou, perm, per_class)
