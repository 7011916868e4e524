"""Random forest: bootstrap-sampled CART trees with per-node feature sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import TrainConfig
from ..errors import ShapeError, TrainingError
from .svc import as_arrays
from .tree import grow_tree, tree_predict_many


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    features_per_split: int
    seed: int

    def __post_init__(self):
        if not self.trees:
            raise ValueError("a forest needs at least one tree")
        arity = self.trees[0].n_features
        if not 1 <= self.features_per_split <= arity:
            raise ValueError("features_per_split outside [1, arity]")

    @property
    def n_features(self) -> int:
        return self.trees[0].n_features


def majority(votes) -> int:
    """Majority of 0/1 votes; a tie goes to 1."""
    votes = list(votes)
    ones = sum(1 for v in votes if v == 1)
    return int(2 * ones >= len(votes))


def _node_feature_batches(rng, d, k):
    # k random features first; the rest, one at a time, only if those give no valid split
    def batches():
        perm = rng.permutation(d)
        yield perm[:k].tolist()
        for f in perm[k:]:
            yield [int(f)]

    return batches


def forest_train(train, cfg: TrainConfig | None = None) -> ForestModel:
    """Train ``cfg.rf.n_trees`` trees, tree i seeded by ``[cfg.seed, i]``."""
    cfg = cfg or TrainConfig(classifier_kind="rf")
    X, y = as_arrays(train)
    n, d = X.shape
    if n == 0:
        raise TrainingError("empty training set")
    k = cfg.rf.resolve_features(d)
    trees = []
    for i in range(cfg.rf.n_trees):
        rng = np.random.default_rng([cfg.seed, i])
        if cfg.rf.bootstrap:
            idx = rng.integers(0, n, size=n)
            Xb, yb = X[idx], y[idx]
        else:
            Xb, yb = X, y
        chooser = None if k == d else _node_feature_batches(rng, d, k)
        trees.append(grow_tree(Xb, yb, cfg.dt, chooser))
    return ForestModel(tuple(trees), k, cfg.seed)


def forest_votes(model: ForestModel, X) -> np.ndarray:
    """(n_samples, n_trees) matrix of member predictions."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.stack([tree_predict_many(t, X) for t in model.trees], axis=1)


def forest_predict_many(model: ForestModel, X) -> np.ndarray:
    votes = forest_votes(model, X)
    return (2 * votes.sum(axis=1) >= votes.shape[1]).astype(np.int64)


def forest_predict(model: ForestModel, features) -> int:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1:
        raise ShapeError("forest_predict takes a single feature vector")
    return int(forest_predict_many(model, features)[0])

