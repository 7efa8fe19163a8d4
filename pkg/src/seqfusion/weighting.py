"""Prior-modality sample weights.

Both the prior weights (well- vs misclassified by the prior model) and the
class weights use the inverse-frequency rule ``n / (k * n_i)``. They are
mixed per sample by ``alpha`` and ``beta`` under one of two strategies:

* ``SAME``: every sample gets ``alpha * class_w + beta * prior_w``.
* ``STRATIFIED``: only misclassified samples receive the prior term.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import (AllZeroWeights, DegeneratePartitionWarning,
                         InvalidConfig, LengthMismatch)


class Strategy(str, enum.Enum):
    SAME = "same"
    STRATIFIED = "stratified"


@dataclass(frozen=True)
class PriorPartition:
    s1: np.ndarray  # well classified
    s2: np.ndarray  # misclassified
    n: int

    def sizes(self) -> tuple:
        return (len(self.s1), len(self.s2))

    def membership(self) -> np.ndarray:
        """Per-sample set index: 0 for s1, 1 for s2."""
        m = np.zeros(self.n, dtype=np.intp)
        m[self.s2] = 1
        return m


@dataclass(frozen=True)
class SetWeights:
    weights: tuple
    degenerate: bool = False

    def __getitem__(self, i):
        return self.weights[i]

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True)
class WeightingConfig:
    alpha: float = 1.0
    beta: float = 0.0
    strategy: Strategy = Strategy.SAME

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise InvalidConfig(f"{name}={v} outside [0, 1]")
        if self.alpha == 0 and self.beta == 0:
            raise AllZeroWeights("alpha and beta are both zero")
        object.__setattr__(self, "strategy", Strategy(self.strategy))


def set_weights(sizes: Sequence[int], n: int | None = None, k: int | None = None) -> SetWeights:
    """Inverse-frequency weight ``n / (k * size)`` per set.

    If any set is empty the formula is undefined; neutral weights of 1.0 are
    returned instead and a :class:`DegeneratePartitionWarning` is issued.
    """
    sizes = [int(s) for s in sizes]
    if any(s < 0 for s in sizes):
        raise InvalidConfig(f"negative set size in {sizes}")
    n = sum(sizes) if n is None else int(n)
    k = len(sizes) if k is None else int(k)
    if n != sum(sizes):
        raise InvalidConfig(f"n={n} does not equal the sum of set sizes {sum(sizes)}")
    if any(s == 0 for s in sizes):
        warnings.warn(f"empty set in partition sizes {sizes}; using neutral weights",
                      DegeneratePartitionWarning, stacklevel=2)
        return SetWeights(tuple(1.0 for _ in sizes), degenerate=True)
    return SetWeights(tuple(n / (k * s) for s in sizes))


def class_weights(labels) -> SetWeights:
    """Class weights ordered ``(positive, negative)``."""
    labels = np.asarray(labels)
    pos = int(np.count_nonzero(labels == 1))
    return set_weights((pos, labels.shape[0] - pos))


def partition_by_prior(prior_predictions, labels, threshold: float = 0.5) -> PriorPartition:
    p = np.asarray(prior_predictions, dtype=np.float64)
    y = np.asarray(labels)
    if p.shape != y.shape:
        raise LengthMismatch(f"{p.shape[0]} predictions for {y.shape[0]} labels")
    if not 0.0 < threshold < 1.0:
        raise InvalidConfig(f"threshold {threshold} outside (0, 1)")
    correct = (p >= threshold) == (y == 1)
    return PriorPartition(np.flatnonzero(correct), np.flatnonzero(~correct), int(y.shape[0]))


def compose_weights(labels, partition: PriorPartition, class_w: SetWeights,
                    prior_w: SetWeights, config: WeightingConfig) -> np.ndarray:
    """Per-sample weights mixing class and prior weights.

    ``class_w`` is indexed (positive, negative); ``prior_w`` is indexed
    (s1, s2).
    """
    y = np.asarray(labels)
    if y.shape[0] != partition.n:
        raise LengthMismatch(f"{y.shape[0]} labels for a partition of {partition.n}")
    cw = np.where(y == 1, class_w[0], class_w[1]).astype(np.float64)
    member = partition.membership()
    pw = np.where(member == 0, prior_w[0], prior_w[1]).astype(np.float64)
    a, b = float(config.alpha), float(config.beta)
    if config.strategy is Strategy.SAME:
        w = a * cw + b * pw
    else:
        w = np.where(member == 1, a * cw + b * pw, a * cw)
    if not np.all(np.isfinite(w)) or not (w > 0).any():
        raise AllZeroWeights(f"all sample weights are zero for {config}")
    return w
