"""CART decision tree with Gini impurity for 0/1 labels."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from ..config import TrainConfig, TreeParams
from ..errors import DegenerateNodeError, ShapeError, TrainingError
from .svc import as_arrays


def gini(counts) -> float:
    """1 - p0^2 - p1^2 for a pair of class counts."""
    n0, n1 = counts
    total = n0 + n1
    if total == 0:
        raise DegenerateNodeError("gini of an empty node")
    p0, p1 = n0 / total, n1 / total
    return 1.0 - p0 * p0 - p1 * p1


@dataclass(frozen=True)
class TreeNode:
    """Internal node when ``feature >= 0``; leaf otherwise.

    Samples with ``x[feature] <= threshold`` go left.
    """

    feature: int = -1
    threshold: float = 0.0
    left: int = -1
    right: int = -1
    label: int = 0
    counts: tuple = (0, 0)

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True)
class TreeModel:
    nodes: tuple
    max_depth: int
    n_features: int

    @cached_property
    def _arrays(self):
        feature = np.array([n.feature for n in self.nodes], dtype=np.int64)
        threshold = np.array([n.threshold for n in self.nodes], dtype=np.float64)
        left = np.array([n.left for n in self.nodes], dtype=np.int64)
        right = np.array([n.right for n in self.nodes], dtype=np.int64)
        label = np.array([n.label for n in self.nodes], dtype=np.int64)
        return feature, threshold, left, right, label

    def leaf_index(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ShapeError(f"expected {self.n_features} features, got {X.shape[1]}")
        feature, threshold, left, right, _ = self._arrays
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            r = rows[inner]
            go_left = X[r, f[inner]] <= threshold[node[inner]]
            node[r] = np.where(go_left, left[node[inner]], right[node[inner]])


def _leaf(y_idx_labels) -> TreeNode:
    n1 = int(y_idx_labels.sum())
    n0 = len(y_idx_labels) - n1
    return TreeNode(label=int(n1 >= n0), counts=(n0, n1))


def _feature_candidates(x, y, min_leaf):
    """Valid splits on one feature: (numerators, denominators, thresholds).

    Split quality is ``S = sum_children (c0^2 + c1^2) / n_child``; maximising
    S minimises the weighted child Gini. S is kept as an exact integer
    fraction so that ties are detected exactly.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    ys = y[order]
    n = len(xs)
    boundary = np.flatnonzero(xs[:-1] < xs[1:])
    n_left = boundary + 1
    keep = (n_left >= min_leaf) & (n - n_left >= min_leaf)
    boundary, n_left = boundary[keep], n_left[keep]
    if len(boundary) == 0:
        return None
    cum1 = np.cumsum(ys)
    a1 = cum1[boundary]
    a0 = n_left - a1
    n_right = n - n_left
    b1 = cum1[-1] - a1
    b0 = n_right - b1
    s_left = a0 * a0 + a1 * a1
    s_right = b0 * b0 + b1 * b1
    num = s_left * n_right + s_right * n_left
    den = n_left * n_right
    thresholds = (xs[boundary] + xs[boundary + 1]) / 2.0
    return num, den, thresholds


def best_split(X, y, features, min_leaf):
    """Best (feature, threshold) over ``features`` or None.

    Ties in quality go to the lowest feature index, then the lowest threshold.
    """
    found = []
    for f in sorted(int(f) for f in features):
        cand = _feature_candidates(X[:, f], y, min_leaf)
        if cand is not None:
            found.append((f, *cand))
    if not found:
        return None
    approx_best = max(float(np.max(num / den)) for _, num, den, _ in found)
    best_key = None
    best = None
    for f, num, den, thr in found:
        near = np.flatnonzero(num / den >= approx_best * (1.0 - 1e-12))
        for p in near:
            q = Fraction(int(num[p]), int(den[p]))
            if best_key is None or q > best_key:
                best_key, best = q, (f, float(thr[p]))
    return best


def grow_tree(X, y, params: TreeParams, choose_features=None) -> TreeModel:
    """Greedy CART growth in depth-first preorder.

    ``choose_features()`` returns an iterator of feature-index batches to
    inspect at a node; later batches are consulted only while no valid split
    has been found. The default inspects every feature at once.
    """
    n, d = X.shape
    y = np.asarray(y, dtype=np.int64)
    nodes: list = []

    def build(idx, depth):
        slot = len(nodes)
        nodes.append(None)
        yy = y[idx]
        n1 = int(yy.sum())
        pure = n1 == 0 or n1 == len(idx)
        split = None
        if not pure and depth < params.max_depth and len(idx) >= 2 * params.min_samples_leaf:
            Xn = X[idx]
            batches = [range(d)] if choose_features is None else choose_features()
            inspected: list = []
            for batch in batches:
                inspected.extend(batch)
                split = best_split(Xn, yy, inspected, params.min_samples_leaf)
                if split is not None:
                    break
        if split is None:
            nodes[slot] = _leaf(yy)
            return slot
        f, thr = split
        go_left = X[idx, f] <= thr
        left = build(idx[go_left], depth + 1)
        right = build(idx[~go_left], depth + 1)
        nodes[slot] = TreeNode(feature=f, threshold=thr, left=left, right=right)
        return slot

    build(np.arange(n), 0)
    return TreeModel(tuple(nodes), params.max_depth, d)


def tree_train(train, cfg: TrainConfig | None = None) -> TreeModel:
    cfg = cfg or TrainConfig(classifier_kind="dt")
    X, y = as_arrays(train)
    if len(y) == 0:
        raise TrainingError("empty training set")
    return grow_tree(X, y, cfg.dt)


def tree_predict(model: TreeModel, features) -> int:
    """Label of the leaf reached by one feature vector."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1:
        raise ShapeError("tree_predict takes a single feature vector")
    return int(model.nodes[int(model.leaf_index(features)[0])].label)


def tree_predict_many(model: TreeModel, X) -> np.ndarray:
    label = model._arrays[4]
    return label[model.leaf_index(X)]
