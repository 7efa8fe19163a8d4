"""The four model configurations and the Sequential Fusion training pipeline.

* A, Sequential Fusion: a prior model on the clinical view marks training
  samples as well- or misclassified; those sets drive the sample weights of
  a second model trained on the image view.
* B, Early Fusion: one model on the concatenated views.
* C, Image only; D, Prior (clinical) only.

Every model is trained with inverse-frequency class weights.
"""
from __future__ import annotations

import enum
import itertools
import json
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import gbt
from .data import Dataset, concat_views
from .exceptions import (AllZeroWeights, DegeneratePartitionWarning,
                         InvalidConfig)
from .metrics import evaluate
from .weighting import (PriorPartition, Strategy, WeightingConfig,
                        class_weights, compose_weights, partition_by_prior,
                        set_weights)


class Variant(str, enum.Enum):
    SEQUENTIAL = "A"
    EARLY = "B"
    IMAGE_ONLY = "C"
    PRIOR_ONLY = "D"

    @property
    def label(self) -> str:
        return _LABELS[self]


_LABELS = {
    Variant.SEQUENTIAL: "sequential_fusion",
    Variant.EARLY: "early_fusion",
    Variant.IMAGE_ONLY: "image_only",
    Variant.PRIOR_ONLY: "prior_only",
}

GRID_LEVELS = (0.0, 0.25, 0.5, 0.75, 1.0)


def default_grid():
    return tuple((a, b) for a, b in itertools.product(GRID_LEVELS, GRID_LEVELS)
                 if (a, b) != (0.0, 0.0))


@dataclass(frozen=True)
class FusionConfig:
    prior_modality: str = "clinical"
    second_modality: str = "image"
    threshold: float = 0.5
    gbt: gbt.GBTConfig = field(default_factory=gbt.GBTConfig)
    weight_grid: tuple = field(default_factory=default_grid)
    strategies: tuple = (Strategy.SAME, Strategy.STRATIFIED)
    # "in_sample": partition from the prior's predictions on its own training
    # data; "out_of_fold": from k-fold predictions inside the training split.
    partition: str = "out_of_fold"
    oof_folds: int = 5
    second_stage_concat: bool = False
    n_jobs: int = 1

    def __post_init__(self):
        if self.prior_modality == self.second_modality:
            raise InvalidConfig("prior and second modality must differ")
        grid = tuple((float(a), float(b)) for a, b in self.weight_grid)
        if not grid:
            raise InvalidConfig("weight grid is empty")
        if (0.0, 0.0) in grid:
            raise InvalidConfig("(0, 0) is not allowed in the weight grid")
        for a, b in grid:
            WeightingConfig(a, b)
        object.__setattr__(self, "weight_grid", grid)
        strategies = tuple(Strategy(s) for s in self.strategies)
        if not strategies:
            raise InvalidConfig("no weighting strategy given")
        object.__setattr__(self, "strategies", strategies)
        if not 0.0 < self.threshold < 1.0:
            raise InvalidConfig("threshold must lie in (0, 1)")
        if self.partition not in ("in_sample", "out_of_fold"):
            raise InvalidConfig(f"unknown partition mode {self.partition!r}")
        if self.oof_folds < 2:
            raise InvalidConfig("oof_folds must be >= 2")
        if self.n_jobs < 1:
            raise InvalidConfig("n_jobs must be >= 1")

    def to_dict(self) -> dict:
        return {
            "prior_modality": self.prior_modality,
            "second_modality": self.second_modality,
            "threshold": self.threshold,
            "gbt": asdict(self.gbt),
            "weight_grid": [list(p) for p in self.weight_grid],
            "strategies": [s.value for s in self.strategies],
            "partition": self.partition,
            "oof_folds": self.oof_folds,
            "second_stage_concat": self.second_stage_concat,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FusionConfig":
        d = dict(d)
        if "gbt" in d:
            d["gbt"] = gbt.GBTConfig(**d["gbt"])
        if "weight_grid" in d:
            d["weight_grid"] = tuple(tuple(p) for p in d["weight_grid"])
        if "strategies" in d:
            d["strategies"] = tuple(d["strategies"])
        return cls(**d)


@dataclass(frozen=True)
class Candidate:
    alpha: float
    beta: float
    strategy: Strategy
    f1: float
    sensitivity: float
    skipped: bool = False

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "strategy": self.strategy.value,
                "f1": self.f1, "sensitivity": self.sensitivity, "skipped": self.skipped}


@dataclass(frozen=True, eq=False)
class FusionModel:
    variant: Variant
    final_model: gbt.GBTModel
    routing: tuple
    threshold: float = 0.5
    prior_model: Optional[gbt.GBTModel] = None
    prior_routing: tuple = ()
    weighting: Optional[WeightingConfig] = None
    partition_sizes: Optional[tuple] = None
    degenerate_partition: bool = False
    candidates: tuple = ()

    def chosen_weighting(self) -> Optional[dict]:
        if self.weighting is None:
            return None
        w = self.weighting
        return {"alpha": w.alpha, "beta": w.beta, "strategy": w.strategy.value}

    def to_dict(self) -> dict:
        d = {
            "variant": self.variant.value,
            "routing": list(self.routing),
            "threshold": self.threshold,
            "chosen_weighting": self.chosen_weighting(),
            "final_model": self.final_model.to_dict(),
        }
        if self.prior_model is not None:
            d["prior_model"] = self.prior_model.to_dict()
            d["prior_routing"] = list(self.prior_routing)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "FusionModel":
        w = d.get("chosen_weighting")
        prior = d.get("prior_model")
        return cls(
            variant=Variant(d["variant"]),
            final_model=gbt.GBTModel.from_dict(d["final_model"]),
            routing=tuple(d["routing"]),
            threshold=float(d.get("threshold", 0.5)),
            prior_model=gbt.GBTModel.from_dict(prior) if prior else None,
            prior_routing=tuple(d.get("prior_routing", ())),
            weighting=WeightingConfig(w["alpha"], w["beta"], w["strategy"]) if w else None,
        )


def _train_idx(split):
    return np.asarray(split.train, dtype=np.intp)


def _class_weighted_fit(view, labels, cfg: gbt.GBTConfig):
    cw = class_weights(labels)
    w = np.where(labels == 1, cw[0], cw[1]).astype(np.float64)
    return gbt.fit(view, labels, w, cfg)


def _single_view_model(dataset, split, config, modality, variant):
    idx = _train_idx(split)
    y = dataset.labels[idx]
    view = dataset.view(modality).take(idx)
    model = _class_weighted_fit(view, y, config.gbt)
    return FusionModel(variant, model, (modality,), config.threshold)


def train_prior(dataset: Dataset, split, config: FusionConfig = FusionConfig()) -> FusionModel:
    return _single_view_model(dataset, split, config, config.prior_modality, Variant.PRIOR_ONLY)


def train_image_only(dataset: Dataset, split, config: FusionConfig = FusionConfig()) -> FusionModel:
    return _single_view_model(dataset, split, config, config.second_modality, Variant.IMAGE_ONLY)


def train_early_fusion(dataset: Dataset, split, config: FusionConfig = FusionConfig()) -> FusionModel:
    idx = _train_idx(split)
    names = (config.prior_modality, config.second_modality)
    view = concat_views(dataset, names).take(idx)
    model = _class_weighted_fit(view, dataset.labels[idx], config.gbt)
    return FusionModel(Variant.EARLY, model, names, config.threshold)


def _stratified_folds(labels, k, seed):
    rng = np.random.default_rng(seed)
    fold = np.empty(labels.shape[0], dtype=np.intp)
    for cls in (0, 1):
        members = rng.permutation(np.flatnonzero(labels == cls))
        fold[members] = np.arange(members.shape[0]) % k
    return fold


def prior_training_predictions(prior_model, view, labels, config: FusionConfig):
    """Prior-model probabilities on the training split used to build s1/s2."""
    if config.partition == "in_sample":
        return gbt.predict_proba(prior_model, view)
    fold = _stratified_folds(labels, config.oof_folds, config.gbt.seed)
    probs = np.empty(labels.shape[0])
    for f in range(config.oof_folds):
        held = fold == f
        fold_model = _class_weighted_fit(view.take(np.flatnonzero(~held)), labels[~held], config.gbt)
        probs[held] = gbt.predict_proba(fold_model, view.take(np.flatnonzero(held)))
    return probs


def _selection_key(c: Candidate, strategy_rank):
    return (-c.f1, -c.sensitivity, c.beta, c.alpha, strategy_rank[c.strategy])


def train_sequential_fusion(dataset: Dataset, split, config: FusionConfig = FusionConfig()) -> FusionModel:
    train = _train_idx(split)
    val = np.asarray(split.validation, dtype=np.intp)
    if val.size == 0:
        raise InvalidConfig("sequential fusion needs a nonempty validation split")
    y = dataset.labels[train]
    prior_view = dataset.view(config.prior_modality).take(train)
    prior_model = _class_weighted_fit(prior_view, y, config.gbt)

    probs = prior_training_predictions(prior_model, prior_view, y, config)
    partition: PriorPartition = partition_by_prior(probs, y, config.threshold)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", DegeneratePartitionWarning)
        prior_w = set_weights(partition.sizes(), partition.n, 2)
    degenerate = prior_w.degenerate
    for w in caught:
        warnings.warn(w.message, w.category, stacklevel=2)
    class_w = class_weights(y)

    routing = ((config.prior_modality, config.second_modality) if config.second_stage_concat
               else (config.second_modality,))
    second = concat_views(dataset, routing)
    second_train, second_val = second.take(train), second.take(val)
    y_val = dataset.labels[val]

    specs = []
    for (a, b), strategy in itertools.product(config.weight_grid, config.strategies):
        wcfg = WeightingConfig(a, b, strategy)
        try:
            w = compose_weights(y, partition, class_w, prior_w, wcfg)
        except AllZeroWeights:
            w = None
        specs.append((wcfg, w))

    # Candidates with identical weight vectors yield identical models.
    unique = {}
    for _, w in specs:
        if w is not None:
            unique.setdefault(w.tobytes(), w)

    def train_one(w):
        model = gbt.fit(second_train, y, w, config.gbt)
        pred = gbt.predict(model, second_val, config.threshold)
        return model, evaluate(y_val, pred)

    keys = list(unique)
    if config.n_jobs > 1:
        with ThreadPoolExecutor(config.n_jobs) as pool:
            results = list(pool.map(lambda key: train_one(unique[key]), keys))
    else:
        results = [train_one(unique[key]) for key in keys]
    trained = dict(zip(keys, results))

    candidates, models = [], []
    for wcfg, w in specs:
        if w is None:
            candidates.append(Candidate(wcfg.alpha, wcfg.beta, wcfg.strategy, 0.0, 0.0, skipped=True))
            models.append(None)
            continue
        model, m = trained[w.tobytes()]
        candidates.append(Candidate(wcfg.alpha, wcfg.beta, wcfg.strategy, m.f1, m.sensitivity))
        models.append(model)

    rank = {s: i for i, s in enumerate((Strategy.SAME, Strategy.STRATIFIED))}
    live = [i for i, c in enumerate(candidates) if not c.skipped]
    best = min(live, key=lambda i: _selection_key(candidates[i], rank))
    chosen = candidates[best]
    return FusionModel(
        Variant.SEQUENTIAL, models[best], routing, config.threshold,
        prior_model=prior_model, prior_routing=(config.prior_modality,),
        weighting=WeightingConfig(chosen.alpha, chosen.beta, chosen.strategy),
        partition_sizes=partition.sizes(), degenerate_partition=degenerate,
        candidates=tuple(candidates),
    )


TRAINERS = {
    Variant.SEQUENTIAL: train_sequential_fusion,
    Variant.EARLY: train_early_fusion,
    Variant.IMAGE_ONLY: train_image_only,
    Variant.PRIOR_ONLY: train_prior,
}


def train_variant(variant, dataset, split, config: FusionConfig = FusionConfig()) -> FusionModel:
    return TRAINERS[Variant(variant)](dataset, split, config)


def predict_fusion(model: FusionModel, dataset: Dataset, indices=None):
    """Probabilities and 0/1 predictions for ``indices`` (default: all samples).

    Only the modalities in ``model.routing`` are read.
    """
    views = [dataset.view(name) for name in model.routing]
    idx = np.arange(dataset.n) if indices is None else np.asarray(indices, dtype=np.intp)
    x = views[0].matrix[idx] if len(views) == 1 else np.hstack([v.matrix[idx] for v in views])
    probs = gbt.predict_proba(model.final_model, x)
    return probs, (probs >= model.threshold).astype(np.int64)


def with_grid(config: FusionConfig, grid: Sequence, strategies=None) -> FusionConfig:
    """Copy of ``config`` with a different weight grid (and strategies)."""
    kw = {"weight_grid": tuple(tuple(p) for p in grid)}
    if strategies is not None:
        kw["strategies"] = tuple(strategies)
    return replace(config, **kw)
