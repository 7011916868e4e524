"""Canonical JSON form of trained models (ModelParams) and kind dispatch."""

from __future__ import annotations

import json

import numpy as np

from ..config import TrainConfig
from ..dataset.csvio import dumps_canonical
from .forest import ForestModel, forest_predict_many, forest_train
from .svc import LinearSvcModel, svc_predict_many, svc_train
from .tree import TreeModel, TreeNode, tree_predict_many, tree_train


def model_kind(model) -> str:
    if isinstance(model, LinearSvcModel):
        return "svc"
    if isinstance(model, TreeModel):
        return "dt"
    if isinstance(model, ForestModel):
        return "rf"
    raise TypeError(f"not a model: {type(model).__name__}")


def _tree_to_obj(t: TreeModel) -> dict:
    nodes = []
    for n in t.nodes:
        if n.is_leaf:
            nodes.append({"label": int(n.label), "counts": [int(c) for c in n.counts]})
        else:
            nodes.append({"feature": int(n.feature), "threshold": float(n.threshold), "left": n.left, "right": n.right})
    return {"max_depth": t.max_depth, "n_features": t.n_features, "nodes": nodes}


def _tree_from_obj(obj) -> TreeModel:
    nodes = []
    for n in obj["nodes"]:
        if "feature" in n:
            nodes.append(TreeNode(int(n["feature"]), float(n["threshold"]), int(n["left"]), int(n["right"])))
        else:
            nodes.append(TreeNode(label=int(n["label"]), counts=tuple(int(c) for c in n["counts"])))
    return TreeModel(tuple(nodes), int(obj["max_depth"]), int(obj["n_features"]))


def to_params(model) -> dict:
    """Plain-JSON dict with a ``kind`` tag."""
    kind = model_kind(model)
    if kind == "svc":
        return {
            "kind": "svc",
            "weights": list(model.weights),
            "bias": model.bias,
            "c": model.regularization_c,
            "feature_means": list(model.feature_means),
            "feature_scales": list(model.feature_scales),
        }
    if kind == "dt":
        return {"kind": "dt", **_tree_to_obj(model)}
    return {
        "kind": "rf",
        "features_per_split": model.features_per_split,
        "seed": model.seed,
        "trees": [_tree_to_obj(t) for t in model.trees],
    }


def from_params(obj: dict):
    kind = obj.get("kind")
    if kind == "svc":
        return LinearSvcModel(
            tuple(float(v) for v in obj["weights"]),
            float(obj["bias"]),
            float(obj["c"]),
            tuple(float(v) for v in obj["feature_means"]),
            tuple(float(v) for v in obj["feature_scales"]),
        )
    if kind == "dt":
        return _tree_from_obj(obj)
    if kind == "rf":
        return ForestModel(tuple(_tree_from_obj(t) for t in obj["trees"]), int(obj["features_per_split"]), int(obj["seed"]))
    raise ValueError(f"unknown model kind {kind!r}")


def dumps_model(model) -> bytes:
    return dumps_canonical(to_params(model)).encode("utf-8")


def loads_model(data):
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return from_params(json.loads(data))


def train_model(kind: str, train, cfg: TrainConfig | None = None, **svc_kwargs):
    """Train a classifier of ``kind`` ('svc', 'dt' or 'rf')."""
    cfg = cfg or TrainConfig(classifier_kind=kind)
    if kind == "svc":
        return svc_train(train, cfg, **svc_kwargs)
    if kind == "dt":
        return tree_train(train, cfg)
    if kind == "rf":
        return forest_train(train, cfg)
    raise ValueError(f"unknown classifier kind {kind!r}")


def predict_many(model, X) -> np.ndarray:
    kind = model_kind(model)
    if kind == "svc":
        return svc_predict_many(model, X)
    if kind == "dt":
        return tree_predict_many(model, X)
    return forest_predict_many(model, X)
