"""Server-side aggregation: parameter averaging and weighted-vote ensembles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ..classifiers.params import from_params, model_kind, predict_many, to_params
from ..classifiers.svc import LinearSvcModel
from ..errors import EmptyRoundError, FederationSchemaError

TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class EnsembleMember:
    client_id: str
    model: object
    vote_weight: float


@dataclass(frozen=True)
class GlobalModel:
    """Either an averaged linear SVC or a weighted-vote ensemble."""

    averaged: LinearSvcModel | None = None
    members: tuple = ()

    def __post_init__(self):
        if (self.averaged is None) != bool(self.members):
            raise ValueError("a GlobalModel is either averaged or an ensemble")
        if self.members:
            total = math.fsum(m.vote_weight for m in self.members)
            if abs(total - 1.0) > 1e-12 or any(m.vote_weight <= 0 for m in self.members):
                raise ValueError("ensemble vote weights must be positive and sum to 1")

    @property
    def is_ensemble(self) -> bool:
        return bool(self.members)

    def predict_many(self, X) -> np.ndarray:
        if self.averaged is not None:
            return predict_many(self.averaged, X)
        votes = np.stack([predict_many(m.model, X) for m in self.members], axis=1)
        return weighted_vote(votes, [m.vote_weight for m in self.members])


def weighted_vote(votes, weights) -> np.ndarray:
    """Row-wise weighted majority of 0/1 votes; equal weight goes to 1.

    Normalized weights carry rounding error, so sides within
    ``TIE_TOLERANCE`` of each other count as a tie.
    """
    votes = np.atleast_2d(np.asarray(votes, dtype=np.int64))
    out = np.empty(votes.shape[0], dtype=np.int64)
    for i, row in enumerate(votes):
        yes = math.fsum(w for w, v in zip(weights, row) if v == 1)
        no = math.fsum(w for w, v in zip(weights, row) if v != 1)
        out[i] = int(yes >= no - TIE_TOLERANCE)
    return out


def _check_updates(updates):
    updates = list(updates)
    if not updates:
        raise EmptyRoundError("no client updates to aggregate")
    kinds = {model_kind(u.params) for u in updates}
    if len(kinds) != 1:
        raise FederationSchemaError(f"mixed classifier kinds in one round: {sorted(kinds)}")
    arity = {u.params.n_features for u in updates}
    if len(arity) != 1:
        raise FederationSchemaError(f"feature arity differs across clients: {sorted(arity)}")
    if sum(u.n_samples for u in updates) <= 0:
        raise EmptyRoundError("total n_samples is zero")
    return sorted(updates, key=lambda u: u.client_id)


def fedavg(updates) -> LinearSvcModel:
    """Sample-weighted mean of client weights and biases.

    The mean is computed in exact rational arithmetic and rounded once, so
    it is independent of update order, returns a single update unchanged
    and is idempotent on identical updates. Standardisation statistics are
    global and are carried over from the first update.
    """
    updates = _check_updates(updates)
    if model_kind(updates[0].params) != "svc":
        raise FederationSchemaError("fedavg needs linear SVC parameters")
    first = updates[0].params
    for u in updates[1:]:
        if u.params.feature_means != first.feature_means or u.params.feature_scales != first.feature_scales:
            raise FederationSchemaError("clients disagree on standardisation statistics")
    total = sum(u.n_samples for u in updates)

    def mean(values):
        acc = sum(Fraction(n) * Fraction(v) for n, v in values)
        return float(acc / total)

    d = first.n_features
    w = [mean((u.n_samples, u.params.weights[j]) for u in updates) for j in range(d)]
    b = mean((u.n_samples, u.params.bias) for u in updates)
    return first.with_params(w, b)


def meta_aggregate(updates, weighting: str = "n_samples") -> GlobalModel:
    """Ensemble of client models with normalised vote weights.

    ``weighting`` is ``n_samples`` (default) or ``validation_accuracy``.
    """
    updates = _check_updates(updates)
    if weighting == "n_samples":
        raw = [float(u.n_samples) for u in updates]
    elif weighting == "validation_accuracy":
        raw = [u.local_validation_accuracy for u in updates]
        if not any(r > 0 for r in raw):
            raw = [1.0] * len(updates)
        # a zero-accuracy member still needs a positive weight
        raw = [max(r, 1e-12) for r in raw]
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    total = math.fsum(raw)
    members = tuple(EnsembleMember(u.client_id, u.params, r / total) for u, r in zip(updates, raw))
    return GlobalModel(members=members)


def global_to_json(g: GlobalModel) -> dict:
    if g.averaged is not None:
        return {"type": "fedavg", "model": to_params(g.averaged)}
    return {
        "type": "ensemble",
        "tie_rule": "positive",
        "members": [
            {"client_id": m.client_id, "vote_weight": float(m.vote_weight), "params": to_params(m.model)}
            for m in g.members
        ],
    }


def global_from_json(obj: dict) -> GlobalModel:
    if obj["type"] == "fedavg":
        return GlobalModel(averaged=from_params(obj["model"]))
    if obj["type"] == "ensemble":
        return GlobalModel(
            members=tuple(
                EnsembleMember(str(m["client_id"]), from_params(m["params"]), float(m["vote_weight"]))
                for m in obj["members"]
            )
        )
    raise ValueError(f"unknown global model type {obj['type']!r}")
