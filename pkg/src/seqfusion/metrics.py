"""Confusion-matrix metrics, overlap of correctly classified sets, aggregation."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .exceptions import EmptyList, EmptyMatrix, LengthMismatch

METRIC_NAMES = ("accuracy", "f1", "sensitivity", "specificity")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    f1: float
    sensitivity: float
    specificity: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in METRIC_NAMES}


def confusion(labels, predictions) -> ConfusionMatrix:
    y = np.asarray(labels)
    p = np.asarray(predictions)
    if y.shape != p.shape:
        raise LengthMismatch(f"{y.shape[0]} labels vs {p.shape[0]} predictions")
    return ConfusionMatrix(
        tp=int(np.count_nonzero((y == 1) & (p == 1))),
        fp=int(np.count_nonzero((y == 0) & (p == 1))),
        fn=int(np.count_nonzero((y == 1) & (p == 0))),
        tn=int(np.count_nonzero((y == 0) & (p == 0))),
    )


def _ratio(num, den):
    return num / den if den else 0.0


def compute_metrics(cm: ConfusionMatrix) -> MetricsReport:
    """Zero denominators give 0 rather than NaN."""
    if cm.total == 0:
        raise EmptyMatrix("confusion matrix has no samples")
    return MetricsReport(
        accuracy=(cm.tp + cm.tn) / cm.total,
        f1=_ratio(2 * cm.tp, 2 * cm.tp + cm.fp + cm.fn),
        sensitivity=_ratio(cm.tp, cm.tp + cm.fn),
        specificity=_ratio(cm.tn, cm.tn + cm.fp),
    )


def evaluate(labels, predictions) -> MetricsReport:
    return compute_metrics(confusion(labels, predictions))


@dataclass(frozen=True)
class OverlapReport:
    models: tuple
    correct: Mapping[str, tuple]
    regions: Mapping[str, int]
    n: int

    def to_dict(self) -> dict:
        return {"models": list(self.models), "n": self.n, "regions": dict(self.regions)}


def region_key(members: Sequence[str]) -> str:
    return "&".join(sorted(members)) if members else "outside"


def overlap(labels, predictions_by_model: Mapping[str, Sequence[int]]) -> OverlapReport:
    """Count samples in every region of the Venn diagram of correct sets.

    Region keys are the sorted model names joined by ``&``; samples no model
    gets right land in ``"outside"``.
    """
    y = np.asarray(labels)
    names = list(predictions_by_model)
    hits = {}
    for name in names:
        p = np.asarray(predictions_by_model[name])
        if p.shape != y.shape:
            raise LengthMismatch(f"model {name!r}: {p.shape[0]} predictions for {y.shape[0]} labels")
        hits[name] = p == y
    regions = {}
    for r in range(len(names), -1, -1):
        for combo in itertools.combinations(sorted(names), r):
            mask = np.ones(y.shape[0], dtype=bool)
            for name in names:
                mask &= hits[name] if name in combo else ~hits[name]
            regions[region_key(combo)] = int(np.count_nonzero(mask))
    correct = {name: tuple(int(i) for i in np.flatnonzero(hits[name])) for name in names}
    return OverlapReport(tuple(names), correct, regions, int(y.shape[0]))


def aggregate(values: Sequence[float]) -> tuple:
    """Mean and sample (n-1) standard deviation."""
    vals = [float(v) for v in values]
    if not vals:
        raise EmptyList("cannot aggregate an empty list")
    mean = math.fsum(vals) / len(vals)
    if len(vals) == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
    return mean, math.sqrt(var)
