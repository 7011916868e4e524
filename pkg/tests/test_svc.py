import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcfl.classifiers import (
    LinearSvcModel,
    dumps_model,
    loads_model,
    svc_margin,
    svc_objective,
    svc_predict,
    svc_predict_many,
    svc_subgradient,
    svc_train,
)
from svcfl.classifiers.svc import standardize
from svcfl.config import SvcParams, TrainConfig
from svcfl.errors import NumericError, ShapeError, TrainingError

from conftest import blobs


def raw_model(w, b, c=1.0):
    d = len(w)
    return LinearSvcModel.from_arrays(np.asarray(w, float), b, c, np.zeros(d), np.ones(d))


def hinge_objective(w, b, Z, y, c):
    # reference J written from the formula, independent of the package
    s = 2 * np.asarray(y) - 1
    return 0.5 * float(w @ w) + c * float(np.maximum(0.0, 1.0 - s * (Z @ w + b)).sum())


def test_separable_pair():
    m = svc_train((np.array([[-1.0], [1.0]]), np.array([0, 1])), TrainConfig(seed=3))
    assert m.weights[0] > 0
    assert svc_predict(m, [-1.0]) == 0
    assert svc_predict(m, [1.0]) == 1


def test_duplicated_rows_keep_decision_function():
    # Duplicating every row doubles the hinge term, which only leaves the
    # optimum in place when the data are separable; the probe band absorbs
    # subgradient-descent tolerance.
    X, y = blobs(60, 3, 4, shift=4.0)
    cfg = TrainConfig(seed=9)
    a = svc_train((X, y), cfg)
    b = svc_train((np.vstack([X, X]), np.concatenate([y, y])), cfg)
    grid = np.random.default_rng(0).normal(scale=3.0, size=(2000, 3))
    ma = np.array([svc_margin(a, g) for g in grid])
    mb = np.array([svc_margin(b, g) for g in grid])
    clear = np.minimum(np.abs(ma), np.abs(mb)) > 0.02
    assert clear.mean() > 0.9
    assert np.array_equal(ma[clear] >= 0, mb[clear] >= 0)
    cos = a.w() @ b.w() / (np.linalg.norm(a.w()) * np.linalg.norm(b.w()))
    assert cos > 0.999


def test_fixed_seed_is_bit_identical():
    X, y = blobs(80, 4, 5)
    cfg = TrainConfig(seed=17, svc=SvcParams(epochs=30))
    assert dumps_model(svc_train((X, y), cfg)) == dumps_model(svc_train((X, y), cfg))


def test_zero_model_objective_is_c_times_n():
    X, y = blobs(25, 3, 1)
    assert svc_objective(raw_model([0, 0, 0], 0.0, c=2.5), (X, y)) == pytest.approx(2.5 * 25)


def test_gradient_is_regularizer_when_margins_are_large():
    X = np.array([[3.0, 0.0], [-3.0, 0.0]])
    y = np.array([1, 0])
    m = raw_model([1.0, 0.5], 0.0)
    gw, gb = svc_subgradient(m, (X, y))
    assert gw == [1.0, 0.5]
    assert gb == 0.0


def test_subgradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    checked = 0
    h = 1e-6
    while checked < 120:
        n, d = int(rng.integers(2, 9)), int(rng.integers(1, 5))
        X = rng.normal(size=(n, d))
        y = rng.integers(0, 2, size=n)
        w = rng.normal(size=d)
        b = float(rng.normal())
        c = float(rng.uniform(0.1, 3.0))
        s = 2 * y - 1
        if np.min(np.abs(1.0 - s * (X @ w + b))) < 1e-3:
            continue
        m = raw_model(w, b, c)
        gw, gb = svc_subgradient(m, (X, y))
        for j in range(d):
            e = np.zeros(d)
            e[j] = h
            fd = (hinge_objective(w + e, b, X, y, c) - hinge_objective(w - e, b, X, y, c)) / (2 * h)
            assert abs(fd - gw[j]) < 1e-5
        fd_b = (hinge_objective(w, b + h, X, y, c) - hinge_objective(w, b - h, X, y, c)) / (2 * h)
        assert abs(fd_b - gb) < 1e-5
        assert svc_objective(m, (X, y)) == pytest.approx(hinge_objective(w, b, X, y, c), rel=1e-12)
        checked += 1


def test_margin_arithmetic_and_tie():
    m = raw_model([1.0, -1.0], 0.0)
    assert svc_margin(m, [2.0, 1.0]) == 1.0
    assert svc_predict(m, [2.0, 1.0]) == 1
    assert svc_margin(m, [1.0, 1.0]) == 0.0
    assert svc_predict(m, [1.0, 1.0]) == 1


@settings(max_examples=150, deadline=None)
@given(
    st.lists(st.floats(-5, 5), min_size=3, max_size=3),
    st.floats(-5, 5),
    st.lists(st.lists(st.floats(-5, 5), min_size=3, max_size=3), min_size=1, max_size=10),
)
def test_negated_model_complements_labels(w, b, xs):
    m = raw_model(w, b)
    neg = raw_model([-v for v in w], -b)
    for x in xs:
        if svc_margin(m, x) != 0.0:
            assert svc_predict(neg, x) == 1 - svc_predict(m, x)


def test_arity_mismatch():
    with pytest.raises(ShapeError):
        svc_predict(raw_model([1.0, 2.0], 0.0), [1.0])


def test_single_class_and_non_finite():
    X = np.ones((4, 2))
    with pytest.raises(TrainingError):
        svc_train((X, np.zeros(4, dtype=int)))
    X[0, 0] = np.inf
    with pytest.raises(NumericError):
        svc_train((X, np.array([0, 1, 0, 1])))


def test_reported_model_does_not_exceed_initial_objective():
    X, y = blobs(50, 3, 8, shift=0.2)
    m = svc_train((X, y), TrainConfig(seed=1, svc=SvcParams(epochs=15)))
    Z = standardize(m, X)
    assert hinge_objective(m.w(), m.bias, Z, y, 1.0) <= 1.0 * len(y)


def test_label_flip_complements_training_predictions():
    X, y = blobs(40, 2, 12, shift=2.5)
    cfg = TrainConfig(seed=4)
    a = svc_train((X, y), cfg)
    b = svc_train((X, 1 - y), cfg)
    margins = np.array([svc_margin(a, x) for x in X])
    nonzero = np.abs(margins) > 1e-9
    pa, pb = svc_predict_many(a, X), svc_predict_many(b, X)
    assert np.array_equal(pb[nonzero], 1 - pa[nonzero])


def test_standardization_is_stored_in_model():
    X, y = blobs(30, 2, 3)
    X = X * np.array([100.0, 0.01]) + np.array([5.0, -2.0])
    m = svc_train((X, y), TrainConfig(seed=0, svc=SvcParams(epochs=5)))
    Z = standardize(m, X)
    assert np.allclose(Z.mean(axis=0), 0.0, atol=1e-9)
    assert np.allclose(Z.std(axis=0), 1.0, atol=1e-9)
    assert all(s > 0 for s in m.feature_scales)


def test_params_round_trip():
    X, y = blobs(30, 3, 6)
    m = svc_train((X, y), TrainConfig(seed=2, svc=SvcParams(epochs=10)))
    assert loads_model(dumps_model(m)) == m
