import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from svcfl.classifiers import (
    ForestModel,
    TreeModel,
    TreeNode,
    dumps_model,
    forest_predict,
    forest_train,
    forest_votes,
    gini,
    loads_model,
    majority,
    tree_predict,
    tree_predict_many,
    tree_train,
)
from svcfl.classifiers.forest import forest_predict_many
from svcfl.config import ForestParams, TrainConfig, TreeParams
from svcfl.errors import DegenerateNodeError, ShapeError


# ---- exhaustive oracle written from the split rule, in exact arithmetic


def _gini_exact(labels):
    n = len(labels)
    p1 = Fraction(sum(labels), n)
    return 1 - p1 * p1 - (1 - p1) * (1 - p1)


def _weighted_child_gini(left, right):
    n = len(left) + len(right)
    return Fraction(len(left), n) * _gini_exact(left) + Fraction(len(right), n) * _gini_exact(right)


def oracle_tree(rows, labels, depth, max_depth, min_leaf):
    """Nested tuples: ('leaf', label) or ('split', f, thr, left, right)."""
    ones = sum(labels)
    if ones == 0 or ones == len(labels) or depth >= max_depth:
        return ("leaf", 1 if 2 * ones >= len(labels) else 0)
    candidates = []
    for f in range(len(rows[0])):
        values = sorted({Fraction(r[f]) for r in rows})
        for lo, hi in zip(values, values[1:]):
            thr = (lo + hi) / 2
            left = [y for r, y in zip(rows, labels) if Fraction(r[f]) <= thr]
            right = [y for r, y in zip(rows, labels) if Fraction(r[f]) > thr]
            if len(left) < min_leaf or len(right) < min_leaf:
                continue
            candidates.append((_weighted_child_gini(left, right), f, thr))
    if not candidates:
        return ("leaf", 1 if 2 * ones >= len(labels) else 0)
    _, f, thr = min(candidates)
    go = [Fraction(r[f]) <= thr for r in rows]
    left = oracle_tree([r for r, g in zip(rows, go) if g], [y for y, g in zip(labels, go) if g], depth + 1, max_depth, min_leaf)
    right = oracle_tree([r for r, g in zip(rows, go) if not g], [y for y, g in zip(labels, go) if not g], depth + 1, max_depth, min_leaf)
    return ("split", f, thr, left, right)


def oracle_predict(tree, x):
    while tree[0] == "split":
        _, f, thr, left, right = tree
        tree = left if Fraction(x[f]) <= thr else right
    return tree[1]


# ---- gini


def test_gini_values():
    assert gini((5, 5)) == 0.5
    assert gini((7, 0)) == 0.0
    assert gini((3, 1)) == pytest.approx(float(_gini_exact([0, 0, 0, 1])))
    assert gini((3, 1)) == pytest.approx(0.375)


def test_gini_empty():
    with pytest.raises(DegenerateNodeError):
        gini((0, 0))


# ---- tree training


def test_pure_data_is_single_leaf():
    t = tree_train((np.arange(6.0).reshape(3, 2), np.array([1, 1, 1])))
    assert len(t.nodes) == 1
    assert tree_predict(t, [100.0, -3.0]) == 1


def test_stump_on_binary_feature():
    X = np.array([[0.0], [0.0], [1.0], [1.0]])
    y = np.array([0, 0, 1, 1])
    t = tree_train((X, y), TrainConfig("dt", dt=TreeParams(max_depth=8, min_samples_leaf=1)))
    root = t.nodes[0]
    assert (root.feature, root.threshold) == (0, 0.5)
    assert np.array_equal(tree_predict_many(t, X), y)


def test_routing_examples():
    stump = TreeModel(
        (
            TreeNode(feature=0, threshold=0.5, left=1, right=2),
            TreeNode(label=0, counts=(3, 0)),
            TreeNode(label=1, counts=(0, 3)),
        ),
        1,
        1,
    )
    assert tree_predict(stump, [0.4]) == 0
    assert tree_predict(stump, [0.5]) == 0
    assert tree_predict(stump, [0.6]) == 1
    leaf = TreeModel((TreeNode(label=1, counts=(1, 2)),), 3, 2)
    assert tree_predict(leaf, [9.0, -9.0]) == 1


def test_tree_matches_exhaustive_oracle():
    rng = np.random.default_rng(77)
    for _ in range(240):
        n = int(rng.integers(1, 13))
        d = int(rng.integers(1, 4))
        # small integer grids make ties and repeated values common
        X = rng.integers(0, 4, size=(n, d)).astype(float) / 2
        y = rng.integers(0, 2, size=n)
        depth = int(rng.integers(0, 3))
        min_leaf = int(rng.integers(1, 3))
        t = tree_train((X, y), TrainConfig("dt", dt=TreeParams(max_depth=depth, min_samples_leaf=min_leaf)))
        ref = oracle_tree(X.tolist(), y.tolist(), 0, depth, min_leaf)
        assert tree_predict_many(t, X).tolist() == [oracle_predict(ref, x) for x in X.tolist()]


def _leaf_of(t, x):
    i = 0
    while t.nodes[i].feature >= 0:
        node = t.nodes[i]
        i = node.left if x[node.feature] <= node.threshold else node.right
    return i


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_leaf_counts_reaggregate(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 3))
    y = rng.integers(0, 2, size=40)
    t = tree_train((X, y))
    tally = {}
    for x, label in zip(X, y):
        c = tally.setdefault(_leaf_of(t, x), [0, 0])
        c[label] += 1
    for i, node in enumerate(t.nodes):
        if node.feature < 0:
            assert tuple(tally.get(i, [0, 0])) == tuple(node.counts)
            assert sum(node.counts) >= 1


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10_000))
def test_paths_have_consistent_intervals(seed):
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 6, size=(50, 3)).astype(float)
    y = rng.integers(0, 2, size=50)
    t = tree_train((X, y), TrainConfig("dt", dt=TreeParams(max_depth=6, min_samples_leaf=1)))
    seen = set()

    def walk(i, lo, hi):
        assert i not in seen
        seen.add(i)
        node = t.nodes[i]
        if node.feature < 0:
            return
        f = node.feature
        assert lo[f] < node.threshold < hi[f]
        walk(node.left, lo, {**hi, f: node.threshold})
        walk(node.right, {**lo, f: node.threshold}, hi)

    walk(0, dict.fromkeys(range(3), -np.inf), dict.fromkeys(range(3), np.inf))
    assert seen == set(range(len(t.nodes)))


def test_tree_label_flip_complements_exactly():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(60, 3))
    y = rng.integers(0, 2, size=60)
    cfg = TrainConfig("dt", dt=TreeParams(max_depth=4, min_samples_leaf=1))
    a = tree_predict_many(tree_train((X, y), cfg), X)
    b = tree_predict_many(tree_train((X, 1 - y), cfg), X)
    # a leaf whose counts tie would predict 1 both ways; none arise here
    assert np.array_equal(b, 1 - a)


def test_tree_arity_mismatch():
    t = tree_train((np.array([[0.0, 1.0], [1.0, 0.0]]), np.array([0, 1])))
    with pytest.raises(ShapeError):
        tree_predict(t, [1.0])


def test_tree_determinism_and_round_trip():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(80, 4))
    y = (X[:, 0] + 0.3 * rng.normal(size=80) > 0).astype(int)
    a, b = tree_train((X, y)), tree_train((X, y))
    assert dumps_model(a) == dumps_model(b)
    assert loads_model(dumps_model(a)) == a


# ---- forest


def test_degenerate_forest_equals_tree():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(50, 3))
    y = rng.integers(0, 2, size=50)
    cfg = TrainConfig("rf", rf=ForestParams(n_trees=1, features_per_split=3, bootstrap=False), seed=8)
    f = forest_train((X, y), cfg)
    assert f.trees[0] == tree_train((X, y), cfg)


def test_majority_examples():
    assert majority([1, 1, 0]) == 1
    assert majority([1, 0]) == 1
    assert majority([0, 0, 1]) == 0
    assert majority([1, 1, 1]) == 1


def test_majority_against_counting_oracle():
    for k in range(1, 8):
        for votes in itertools.product((0, 1), repeat=k):
            ones = votes.count(1)
            zeros = votes.count(0)
            assert majority(votes) == (1 if ones >= zeros else 0)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 7), st.integers(0, 10_000))
def test_forest_prediction_is_majority_of_trees(n_trees, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(30, 4))
    y = rng.integers(0, 2, size=30)
    f = forest_train((X, y), TrainConfig("rf", rf=ForestParams(n_trees=n_trees), seed=seed))
    probe = rng.normal(size=(20, 4))
    votes = forest_votes(f, probe)
    for row, x in zip(votes, probe):
        ones = sum(tree_predict(t, x) for t in f.trees)
        assert row.tolist() == [tree_predict(t, x) for t in f.trees]
        assert forest_predict(f, x) == (1 if 2 * ones >= n_trees else 0)


def test_forest_seed_determinism_and_defaults():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(60, 9))
    y = (X[:, 0] > 0).astype(int)
    cfg = TrainConfig("rf", rf=ForestParams(n_trees=7), seed=21)
    a, b = forest_train((X, y), cfg), forest_train((X, y), cfg)
    assert dumps_model(a) == dumps_model(b)
    assert a.features_per_split == 3
    assert loads_model(dumps_model(a)) == a
    other = forest_train((X, y), TrainConfig("rf", rf=ForestParams(n_trees=7), seed=22))
    assert dumps_model(other) != dumps_model(a)


def test_forest_needs_trees():
    with pytest.raises(ValueError):
        ForestModel((), 1, 0)


def test_forest_all_ones():
    X = np.array([[0.0], [1.0], [2.0]])
    f = forest_train((X, np.array([1, 1, 1])), TrainConfig("rf", rf=ForestParams(n_trees=5)))
    assert forest_predict_many(f, X).tolist() == [1, 1, 1]
