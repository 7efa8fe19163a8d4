"""Second-order gradient boosted trees on weighted binary cross-entropy.

Trees are grown level-wise with exact greedy split search over every
distinct feature value (thresholds are midpoints between consecutive
distinct values; a sample goes left iff ``x < threshold``). Ties in gain are
broken toward the lowest feature index, then the lowest threshold, so the
fitted model depends only on the data and weights.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np
from numba import njit

from .data import FeatureView
from .exceptions import (InvalidConfig, InvalidWeights, LengthMismatch,
                         SingleClassTraining, WidthMismatch)

EPS = 1e-12
# Relative gain margin below which two candidate splits count as tied.
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class GBTConfig:
    n_estimators: int = 300
    max_depth: int = 6
    learning_rate: float = 0.3
    reg_lambda: float = 1.0
    gamma: float = 0.0
    min_child_hessian: float = 1.0
    base_score: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise InvalidConfig("n_estimators must be >= 1")
        if self.max_depth < 1:
            raise InvalidConfig("max_depth must be >= 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise InvalidConfig("learning_rate must lie in (0, 1]")
        if self.reg_lambda < 0 or self.gamma < 0 or self.min_child_hessian < 0:
            raise InvalidConfig("reg_lambda, gamma and min_child_hessian must be >= 0")
        if not 0.0 < self.base_score < 1.0:
            raise InvalidConfig("base_score must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class Tree:
    """Array-encoded binary tree; node 0 is the root.

    ``feature[i] == -1`` marks a leaf. Leaf ``value`` is the additive
    log-odds contribution with shrinkage already applied.
    """
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def depth(self, node: int = 0) -> int:
        if self.feature[node] < 0:
            return 0
        return 1 + max(self.depth(self.left[node]), self.depth(self.right[node]))

    def to_preorder(self) -> list:
        out = []
        stack = [0]
        while stack:
            i = stack.pop()
            if self.feature[i] < 0:
                out.append(["leaf", float(self.value[i])])
            else:
                out.append(["split", int(self.feature[i]), float(self.threshold[i])])
                stack.append(int(self.right[i]))
                stack.append(int(self.left[i]))
        return out

    @classmethod
    def from_preorder(cls, nodes) -> "Tree":
        feature, threshold, left, right, value = [], [], [], [], []
        pos = 0

        def build():
            nonlocal pos
            node = nodes[pos]
            pos += 1
            i = len(feature)
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(0.0)
            if node[0] == "leaf":
                value[i] = float(node[1])
            else:
                feature[i] = int(node[1])
                threshold[i] = float(node[2])
                left[i] = build()
                right[i] = build()
            return i

        build()
        if pos != len(nodes):
            raise ValueError("trailing nodes in preorder tree encoding")
        return cls(np.array(feature, dtype=np.int64), np.array(threshold),
                   np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                   np.array(value))


@dataclass(frozen=True, eq=False)
class GBTModel:
    trees: tuple
    base_margin: float
    config: GBTConfig
    n_features: int
    _packed: tuple = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_packed", _pack(self.trees))

    def to_dict(self) -> dict:
        return {
            "config": asdict(self.config),
            "base_margin": float(self.base_margin),
            "n_features": int(self.n_features),
            "trees": [t.to_preorder() for t in self.trees],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "GBTModel":
        return cls(tuple(Tree.from_preorder(t) for t in d["trees"]),
                   float(d["base_margin"]), GBTConfig(**d["config"]),
                   int(d["n_features"]))

    @classmethod
    def from_json(cls, text: str) -> "GBTModel":
        return cls.from_dict(json.loads(text))


def _pack(trees):
    offsets = np.zeros(len(trees) + 1, dtype=np.int64)
    for i, t in enumerate(trees):
        offsets[i + 1] = offsets[i] + t.n_nodes
    if not trees:
        empty_i, empty_f = np.zeros(0, np.int64), np.zeros(0)
        return offsets, empty_i, empty_f, empty_i, empty_i, empty_f
    cat = lambda attr: np.concatenate([getattr(t, attr) for t in trees])  # noqa: E731
    return (offsets, cat("feature"), cat("threshold"), cat("left"), cat("right"),
            cat("value"))


def sigmoid(margin):
    p = 1.0 / (1.0 + np.exp(-np.asarray(margin, dtype=np.float64)))
    return np.clip(p, EPS, 1.0 - EPS)


def logit(p: float) -> float:
    return float(np.log(p) - np.log1p(-p))


def _check_lengths(*arrays):
    sizes = {np.shape(a)[0] for a in arrays}
    if len(sizes) != 1:
        raise LengthMismatch(f"inconsistent lengths {sorted(sizes)}")


def weighted_bce(labels, probs, weights) -> float:
    """Weighted binary cross-entropy, summed over samples (nonnegative)."""
    _check_lengths(labels, probs, weights)
    y = np.asarray(labels, dtype=np.float64)
    p = np.clip(np.asarray(probs, dtype=np.float64), EPS, 1.0 - EPS)
    w = np.asarray(weights, dtype=np.float64)
    return float(-np.sum(w * y * np.log(p) + w * (1.0 - y) * np.log1p(-p)))


def bce_grad_hess(labels, probs, weights):
    """Gradient and hessian of :func:`weighted_bce` w.r.t. each sample's margin."""
    _check_lengths(labels, probs, weights)
    y = np.asarray(labels, dtype=np.float64)
    p = np.clip(np.asarray(probs, dtype=np.float64), EPS, 1.0 - EPS)
    w = np.asarray(weights, dtype=np.float64)
    return w * (p - y), w * p * (1.0 - p)


@njit(cache=True, nogil=True)
def _best_splits(order, xs, g, h, slot, g_tot, h_tot, lam, gamma, min_h):
    # order/xs are (d, n): per-feature sort order and sorted values.
    n_slots = g_tot.shape[0]
    d, n = order.shape
    best_gain = np.zeros(n_slots)
    best_feat = np.full(n_slots, -1, np.int64)
    best_thr = np.zeros(n_slots)
    gl = np.zeros(n_slots)
    hl = np.zeros(n_slots)
    last = np.zeros(n_slots)
    seen = np.zeros(n_slots, np.bool_)
    parent = np.empty(n_slots)
    for k in range(n_slots):
        parent[k] = g_tot[k] * g_tot[k] / (h_tot[k] + lam) if h_tot[k] + lam > 0 else 0.0
    for f in range(d):
        gl[:] = 0.0
        hl[:] = 0.0
        seen[:] = False
        for i in range(n):
            s = order[f, i]
            k = slot[s]
            if k < 0:
                continue
            x = xs[f, i]
            if seen[k] and x > last[k]:
                g_l = gl[k]
                h_l = hl[k]
                g_r = g_tot[k] - g_l
                h_r = h_tot[k] - h_l
                if h_l >= min_h and h_r >= min_h:
                    t_l = g_l * g_l / (h_l + lam) if h_l + lam > 0 else 0.0
                    t_r = g_r * g_r / (h_r + lam) if h_r + lam > 0 else 0.0
                    gain = 0.5 * (t_l + t_r - parent[k]) - gamma
                    if gain > best_gain[k] + TIE_RTOL * abs(best_gain[k]):
                        best_gain[k] = gain
                        best_feat[k] = f
                        thr = 0.5 * last[k] + 0.5 * x
                        if thr <= last[k]:
                            thr = x
                        best_thr[k] = thr
            gl[k] += g[s]
            hl[k] += h[s]
            last[k] = x
            seen[k] = True
    return best_gain, best_feat, best_thr


@njit(cache=True, nogil=True)
def _predict_margin(x, base, offsets, feature, threshold, left, right, value):
    n = x.shape[0]
    out = np.full(n, base)
    for t in range(offsets.shape[0] - 1):
        root = offsets[t]
        for s in range(n):
            i = root
            while feature[i] >= 0:
                if x[s, feature[i]] < threshold[i]:
                    i = root + left[i]
                else:
                    i = root + right[i]
            out[s] += value[i]
    return out


class _Presorted:
    def __init__(self, x):
        self.x = np.ascontiguousarray(x, dtype=np.float64)
        order = np.argsort(self.x, axis=0, kind="stable")
        self.order = np.ascontiguousarray(order.T)
        self.xs = np.ascontiguousarray(np.take_along_axis(self.x, order, axis=0).T)


def _grow_tree(data: _Presorted, g, h, cfg: GBTConfig):
    n = g.shape[0]
    feature, threshold, left, right = [-1], [0.0], [-1], [-1]
    node_of = np.zeros(n, dtype=np.int64)
    frontier = [0]
    for _depth in range(cfg.max_depth):
        if not frontier:
            break
        slot_of_node = np.full(len(feature), -1, dtype=np.int64)
        slot_of_node[frontier] = np.arange(len(frontier))
        slot = slot_of_node[node_of]
        active = slot >= 0
        g_tot = np.bincount(slot[active], weights=g[active], minlength=len(frontier))
        h_tot = np.bincount(slot[active], weights=h[active], minlength=len(frontier))
        gain, feat, thr = _best_splits(data.order, data.xs, g, h, slot, g_tot, h_tot,
                                       cfg.reg_lambda, cfg.gamma, cfg.min_child_hessian)
        new_frontier = []
        for k, node in enumerate(frontier):
            if feat[k] < 0:
                continue
            feature[node], threshold[node] = int(feat[k]), float(thr[k])
            left[node] = len(feature)
            right[node] = len(feature) + 1
            for _ in range(2):
                feature.append(-1)
                threshold.append(0.0)
                left.append(-1)
                right.append(-1)
            new_frontier.extend((left[node], right[node]))
            members = np.flatnonzero(node_of == node)
            goes_left = data.x[members, feature[node]] < threshold[node]
            node_of[members] = np.where(goes_left, left[node], right[node])
        frontier = new_frontier

    n_nodes = len(feature)
    g_leaf = np.bincount(node_of, weights=g, minlength=n_nodes)
    h_leaf = np.bincount(node_of, weights=h, minlength=n_nodes)
    denom = h_leaf + cfg.reg_lambda
    safe = denom > 0
    value = np.zeros(n_nodes)
    value[safe] = -cfg.learning_rate * g_leaf[safe] / denom[safe]
    feature = np.array(feature, dtype=np.int64)
    value[feature >= 0] = 0.0
    tree = Tree(feature, np.array(threshold), np.array(left, dtype=np.int64),
                np.array(right, dtype=np.int64), value)
    return tree, node_of


def _validate_training(x, labels, weights):
    y = np.asarray(labels)
    w = np.asarray(weights, dtype=np.float64)
    _check_lengths(x, y, w)
    if y.shape[0] < 2:
        raise SingleClassTraining("need at least two samples")
    if not np.isin(y, (0, 1)).all():
        raise ValueError("labels must be 0/1")
    if np.unique(y).size < 2:
        raise SingleClassTraining("training labels contain a single class")
    if not np.all(np.isfinite(w)) or (w < 0).any() or not (w > 0).any():
        raise InvalidWeights("weights must be finite, nonnegative and not all zero")
    return y.astype(np.float64), w


def fit(view, labels, weights=None, config: GBTConfig | None = None, *,
        allow_single_class: bool = False) -> GBTModel:
    """Train a boosted ensemble on ``view`` (a FeatureView or 2-D array)."""
    cfg = config or GBTConfig()
    x = view.matrix if isinstance(view, FeatureView) else np.asarray(view, dtype=np.float64)
    if x.ndim != 2:
        raise WidthMismatch("feature matrix must be 2-D")
    if weights is None:
        weights = np.ones(x.shape[0])
    try:
        y, w = _validate_training(x, labels, weights)
    except SingleClassTraining:
        if not allow_single_class or np.asarray(labels).shape[0] < 1:
            raise
        y, w = np.asarray(labels, dtype=np.float64), np.asarray(weights, dtype=np.float64)

    data = _Presorted(x)
    base = logit(cfg.base_score)
    margin = np.full(x.shape[0], base)
    trees = []
    for _ in range(cfg.n_estimators):
        g, h = bce_grad_hess(y, sigmoid(margin), w)
        tree, leaf_of = _grow_tree(data, g, h, cfg)
        trees.append(tree)
        margin = margin + tree.value[leaf_of]
    return GBTModel(tuple(trees), base, cfg, x.shape[1])


def _matrix(model: GBTModel, view):
    x = view.matrix if isinstance(view, FeatureView) else np.asarray(view, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise WidthMismatch(f"expected {model.n_features} features, got shape {x.shape}")
    return np.ascontiguousarray(x, dtype=np.float64)


def predict_margin(model: GBTModel, view) -> np.ndarray:
    x = _matrix(model, view)
    return _predict_margin(x, float(model.base_margin), *model._packed)


def iter_margins(model: GBTModel, view) -> Iterator[np.ndarray]:
    """Yield the margin after each boosting round (round 0 is the base margin)."""
    x = _matrix(model, view)
    margin = np.full(x.shape[0], float(model.base_margin))
    yield margin.copy()
    for tree in model.trees:
        margin = margin + _predict_margin(x, 0.0, *_pack((tree,)))
        yield margin.copy()


def predict_proba(model: GBTModel, view) -> np.ndarray:
    return sigmoid(predict_margin(model, view))


def predict(model: GBTModel, view, threshold: float = 0.5) -> np.ndarray:
    return (predict_proba(model, view) >= threshold).astype(np.int64)
