"""Linear support vector classifier trained by primal subgradient descent.

The objective is the L2-regularised hinge loss

    J(w, b) = 0.5 * ||w||^2 + C * sum_i max(0, 1 - y_i (w . z_i + b))

with labels mapped {0, 1} -> {-1, +1} and z the standardised features.
Training takes per-sample subgradient steps on the equivalent normalised
objective ``lam/2 ||w||^2 + mean_i hinge_i`` with ``lam = 1 / (C * n_total)``.
The step size is ``1 / (C * t)`` where ``t`` is the 1-based epoch index, so
it is constant within an epoch. ``n_total`` defaults to the local sample count;
federated clients pass the federation-wide count so that every client
optimises the same objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..config import TrainConfig
from ..errors import NumericError, ShapeError, TrainingError

SCALE_FLOOR = 1e-12


@dataclass(frozen=True)
class LinearSvcModel:
    weights: tuple
    bias: float
    regularization_c: float
    feature_means: tuple
    feature_scales: tuple

    def __post_init__(self):
        d = len(self.weights)
        if len(self.feature_means) != d or len(self.feature_scales) != d:
            raise ShapeError("weights, feature_means and feature_scales must share one length")
        if any(not s > 0 for s in self.feature_scales):
            raise ValueError("feature scales must be strictly positive")
        if not self.regularization_c > 0:
            raise ValueError("regularization_c must be positive")

    @property
    def n_features(self) -> int:
        return len(self.weights)

    def w(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=np.float64)

    @classmethod
    def from_arrays(cls, w, b, c, means, scales) -> "LinearSvcModel":
        return cls(
            tuple(float(v) for v in w),
            float(b),
            float(c),
            tuple(float(v) for v in means),
            tuple(float(v) for v in scales),
        )

    def with_params(self, w, b) -> "LinearSvcModel":
        return LinearSvcModel.from_arrays(w, b, self.regularization_c, self.feature_means, self.feature_scales)


def as_arrays(data) -> tuple[np.ndarray, np.ndarray]:
    """Accept a Dataset or an ``(X, y)`` pair; return float X and int 0/1 y."""
    if hasattr(data, "to_arrays"):
        X, y = data.to_arrays()
    else:
        X, y = data
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ShapeError(f"bad shapes X{X.shape} y{y.shape}")
    return X, y


def sufficient_stats(X) -> tuple[int, np.ndarray, np.ndarray]:
    """Per-feature (count, sum, sum of squares)."""
    X = np.asarray(X, dtype=np.float64)
    return X.shape[0], X.sum(axis=0), (X * X).sum(axis=0)


def standardization_from_stats(stats) -> tuple[np.ndarray, np.ndarray]:
    """Pooled mean and population standard deviation from sufficient stats."""
    stats = list(stats)
    n = sum(s[0] for s in stats)
    if n == 0:
        raise ValueError("no samples to standardise")
    total = np.sum([s[1] for s in stats], axis=0)
    total_sq = np.sum([s[2] for s in stats], axis=0)
    mean = total / n
    var = np.maximum(total_sq / n - mean * mean, 0.0)
    return mean, np.maximum(np.sqrt(var), SCALE_FLOOR)


def _check_finite(X):
    if not np.all(np.isfinite(X)):
        raise NumericError("non-finite feature value")


def standardize(model: LinearSvcModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.n_features:
        raise ShapeError(f"expected {model.n_features} features, got {X.shape[-1]}")
    return (X - np.asarray(model.feature_means)) / np.asarray(model.feature_scales)


def svc_margins(model: LinearSvcModel, X) -> np.ndarray:
    return standardize(model, np.atleast_2d(X)) @ model.w() + model.bias


def svc_margin(model: LinearSvcModel, features) -> float:
    """Decision value ``w . standardize(x) + b`` for one feature vector."""
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 1:
        raise ShapeError("svc_margin takes a single feature vector")
    return float(svc_margins(model, features)[0])


def svc_predict(model: LinearSvcModel, features) -> int:
    """1 if the margin is >= 0 (ties go to the positive class), else 0."""
    return int(svc_margin(model, features) >= 0.0)


def svc_predict_many(model: LinearSvcModel, X) -> np.ndarray:
    return (svc_margins(model, X) >= 0.0).astype(np.int64)


def _signed(y) -> np.ndarray:
    return np.where(np.asarray(y) == 1, 1.0, -1.0)


def hinge_sum(model: LinearSvcModel, data) -> float:
    X, y = as_arrays(data)
    m = _signed(y) * svc_margins(model, X)
    return float(np.maximum(0.0, 1.0 - m).sum())


def objective_from_hinge(w, c: float, hinge: float) -> float:
    w = np.asarray(w, dtype=np.float64)
    return 0.5 * float(w @ w) + c * hinge


def svc_objective(model: LinearSvcModel, data) -> float:
    """J(w, b) on ``data`` (Dataset or (X, y)), in standardised coordinates."""
    return objective_from_hinge(model.w(), model.regularization_c, hinge_sum(model, data))


def svc_subgradient(model: LinearSvcModel, data) -> tuple[list, float]:
    """A subgradient of J with respect to (w, b).

    Samples sitting exactly on the margin contribute nothing.
    """
    X, y = as_arrays(data)
    if len(y) == 0:
        raise ShapeError("svc_subgradient needs data")
    Z = standardize(model, X)
    ys = _signed(y)
    active = ys * (Z @ model.w() + model.bias) < 1.0
    c = model.regularization_c
    gw = model.w() - c * (ys[active, None] * Z[active]).sum(axis=0)
    gb = -c * float(ys[active].sum())
    return gw.tolist(), gb


def epoch_order(seed: int, epoch: int, n: int) -> np.ndarray:
    """Visiting order for one epoch; depends only on (seed, absolute epoch)."""
    return np.random.default_rng([seed, epoch]).permutation(n)


def _sgd_epoch(Z, ys, w, b, lam, c, order, t):
    for i in order:
        zi = Z[i]
        yi = ys[i]
        violated = yi * (float(w @ zi) + b) < 1.0
        eta = 1.0 / (c * t)
        w *= 1.0 - eta * lam
        if violated:
            w += (eta * yi) * zi
            b += eta * yi
    return w, b


def _full_batch_step(Z, ys, w, b, lam, c, t):
    active = ys * (Z @ w + b) < 1.0
    n = len(ys)
    gw = lam * w - (ys[active, None] * Z[active]).sum(axis=0) / n
    gb = -float(ys[active].sum()) / n
    eta = 1.0 / (c * t)
    return w - eta * gw, b - eta * gb


def svc_train(
    train,
    cfg: TrainConfig | None = None,
    *,
    standardization=None,
    init: LinearSvcModel | None = None,
    n_total: int | None = None,
    start_epoch: int = 0,
    epochs: int | None = None,
    checkpoint_every: int = 1,
    select_best: bool = True,
) -> LinearSvcModel:
    """Fit a linear SVC by deterministic subgradient descent.

    Each epoch visits the samples in an order drawn from
    ``default_rng([cfg.seed, epoch])``. With ``select_best`` the returned
    model is the lowest-objective iterate among the start point and every
    ``checkpoint_every``-th epoch end (earliest wins ties); otherwise the
    last iterate is returned.

    ``standardization`` (means, scales) overrides the statistics of
    ``train``; ``init`` warm-starts w and b; ``start_epoch`` continues the
    step counter and the epoch sequence of an interrupted run. These hooks
    are what federated clients use.
    """
    cfg = cfg or TrainConfig()
    X, y = as_arrays(train)
    if len(y) == 0:
        raise TrainingError("empty training set")
    _check_finite(X)
    if len(np.unique(y)) < 2:
        raise TrainingError("training data contains a single class")
    c = cfg.svc.c
    epochs = cfg.svc.epochs if epochs is None else epochs
    n, d = X.shape

    if standardization is None:
        means, scales = standardization_from_stats([sufficient_stats(X)])
    else:
        means, scales = (np.asarray(a, dtype=np.float64) for a in standardization)
    if init is not None:
        if init.n_features != d:
            raise ShapeError(f"initial model has {init.n_features} features, data has {d}")
        w, b = init.w().copy(), float(init.bias)
    else:
        w, b = np.zeros(d), 0.0
    template = LinearSvcModel.from_arrays(w, b, c, means, scales)
    Z = standardize(template, X)
    ys = _signed(y)
    lam = 1.0 / (c * (n_total if n_total is not None else n))

    def objective(w_, b_):
        m = ys * (Z @ w_ + b_)
        return objective_from_hinge(w_, c, float(np.maximum(0.0, 1.0 - m).sum()))

    best = (objective(w, b), w.copy(), b) if select_best else None
    for k in range(epochs):
        epoch = start_epoch + k
        if cfg.svc.full_batch:
            w, b = _full_batch_step(Z, ys, w, b, lam, c, epoch + 1)
        else:
            w, b = _sgd_epoch(Z, ys, w, b, lam, c, epoch_order(cfg.seed, epoch, n), epoch + 1)
        if not (np.all(np.isfinite(w)) and math.isfinite(b)):
            raise NumericError("training diverged to a non-finite iterate")
        if select_best and (k + 1) % checkpoint_every == 0:
            j = objective(w, b)
            if j < best[0]:
                best = (j, w.copy(), b)
    if select_best:
        w, b = best[1], best[2]
    return template.with_params(w, b)
