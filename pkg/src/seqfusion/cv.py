"""Stratified train/validation/test splits gated by per-feature t-tests.

A candidate split is kept only if, for every part and every feature of the
gate modality, Welch's t-test against the full cohort gives p above the
threshold. Each repeat rejection-samples its own split from a seed derived
from ``(seed, repeat)``, so repeats are independent of execution order.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .data import Dataset
from .exceptions import GateExhausted, InvalidConfig, TooFewSamples
from .stats import TTestResult, welch_t_test
from .synth import largest_remainder

PARTS = ("train", "validation", "test")


@dataclass(frozen=True, eq=False)
class SplitTriple:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray

    def parts(self) -> dict:
        return {"train": self.train, "validation": self.validation, "test": self.test}

    def to_dict(self) -> dict:
        return {k: [int(i) for i in v] for k, v in self.parts().items()}

    def __eq__(self, other):
        return all(np.array_equal(a, b) for a, b in zip(self.parts().values(),
                                                        other.parts().values()))


@dataclass(frozen=True)
class CVConfig:
    ratios: tuple = (0.6, 0.2, 0.2)
    n_repeats: int = 10
    p_threshold: float = 0.05
    gate_modality: str = "clinical"
    max_attempts_per_repeat: int = 1000
    seed: int = 0

    def __post_init__(self):
        ratios = tuple(float(r) for r in self.ratios)
        if len(ratios) != 3 or any(r <= 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
            raise InvalidConfig(f"ratios must be three positive fractions summing to 1, got {ratios}")
        object.__setattr__(self, "ratios", ratios)
        if not 0.0 < self.p_threshold < 1.0:
            raise InvalidConfig("p_threshold must lie in (0, 1)")
        if self.n_repeats < 1:
            raise InvalidConfig("n_repeats must be >= 1")
        if self.max_attempts_per_repeat < 0:
            raise InvalidConfig("max_attempts_per_repeat must be >= 0")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ratios"] = list(self.ratios)
        return d


def stratified_split(labels, ratios=(0.6, 0.2, 0.2), seed=0) -> SplitTriple:
    """Shuffle each class and apportion it to the three parts by ``ratios``.

    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    y = np.asarray(labels)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    parts = [[], [], []]
    for cls in (1, 0):
        members = np.flatnonzero(y == cls)
        if members.shape[0] < 3:
            raise TooFewSamples(f"class {cls} has {members.shape[0]} samples; need >= 3")
        counts = largest_remainder(members.shape[0], ratios)
        if min(counts) < 1:
            raise TooFewSamples(f"class {cls} leaves a part empty with counts {counts}")
        members = rng.permutation(members)
        start = 0
        for p, c in enumerate(counts):
            parts[p].append(members[start:start + c])
            start += c
    return SplitTriple(*(np.sort(np.concatenate(p)) for p in parts))


def gate_split(dataset: Dataset, split: SplitTriple, config: CVConfig):
    """Return ``(accepted, {(part, feature): TTestResult})``."""
    view = dataset.view(config.gate_modality)
    results: dict[tuple, TTestResult] = {}
    accepted = True
    for part, idx in split.parts().items():
        for j, name in enumerate(view.feature_names):
            column = view.matrix[:, j]
            r = welch_t_test(column[idx], column)
            results[(part, name)] = r
            if not r.p_value > config.p_threshold:
                accepted = False
    return accepted, results


def repeat_rng(seed: int, repeat: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(repeat)]))


def sample_gated_split(dataset: Dataset, config: CVConfig, repeat: int):
    """Rejection-sample one gate-passing split; returns ``(split, attempts)``."""
    rng = repeat_rng(config.seed, repeat)
    failing = {}
    for attempt in range(1, config.max_attempts_per_repeat + 1):
        split = stratified_split(dataset.labels, config.ratios, rng)
        ok, results = gate_split(dataset, split, config)
        if ok:
            return split, attempt
        failing = {k: r.p_value for k, r in results.items() if not r.p_value > config.p_threshold}
    detail = ", ".join(f"{part}/{feat}: p={p:.3g}" for (part, feat), p in sorted(failing.items()))
    raise GateExhausted(
        f"repeat {repeat}: no gate-passing split in {config.max_attempts_per_repeat} attempts"
        + (f" (last failures: {detail})" if detail else ""), failing)


def controlled_cv(dataset: Dataset, config: CVConfig = CVConfig()) -> list:
    return [sample_gated_split(dataset, config, r)[0] for r in range(config.n_repeats)]
