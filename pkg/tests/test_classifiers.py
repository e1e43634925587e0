from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tierpredict import classifiers
from tierpredict.classifiers import (
    ForestParams,
    KNNParams,
    ModelError,
    NaiveBayesParams,
    SVMParams,
    TreeParams,
    feature_importances,
    load_model,
    save_model,
)
from tierpredict.classifiers.forest import RandomForest, tree_seeds
from tierpredict.classifiers.naive_bayes import GaussianNB
from tierpredict.classifiers.tree import DecisionTree, entropy, information_gain
from tierpredict.preprocess import SchemaError, derive_labels, fit_transform

ALL_FAMILIES = [
    KNNParams(k=3),
    NaiveBayesParams(),
    SVMParams(C=1.0, epochs=20),
    TreeParams(max_depth=4),
    ForestParams(n_trees=5, max_depth=4),
]


def _blobs(n=90, d=3, seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(n) % 3
    centres = np.array([[0.2] * d, [0.5] * d, [0.8] * d])
    X = np.clip(centres[y] + rng.normal(0, 0.06, size=(n, d)), 0, 1)
    return X, y


@pytest.mark.parametrize("params", ALL_FAMILIES, ids=lambda p: p.family)
def test_single_class_training(params, matrix):
    X = np.random.default_rng(1).random((12, 3))
    model = classifiers.fit(params, matrix(X, [1] * 12), seed=3)
    assert (model.predict(np.random.default_rng(2).random((30, 3))) == 1).all()


def test_pure_labels_give_depth_zero(matrix):
    model = classifiers.fit(TreeParams(), matrix(np.random.default_rng(0).random((20, 2)), [2] * 20))
    assert model.estimator.depth == 0 and model.estimator.n_nodes == 1


@pytest.mark.parametrize("seed", range(20))
def test_degenerate_forest_matches_tree(seed, matrix):
    rng = np.random.default_rng(seed)
    n, d = int(rng.integers(2, 80)), int(rng.integers(1, 6))
    X = rng.integers(0, 5, size=(n, d)) / 4.0
    y = rng.integers(0, 3, size=n)
    tp = dict(max_depth=None if seed % 2 else 3, min_samples_leaf=1 + seed % 3)
    tree = classifiers.fit(TreeParams(**tp), matrix(X, y), seed=seed)
    forest = classifiers.fit(ForestParams(n_trees=1, bootstrap=False, feature_subsample="all", **tp), matrix(X, y), seed=seed)
    Q = rng.random((50, d))
    np.testing.assert_array_equal(tree.predict(Q), forest.predict(Q))


def test_knn_examples(matrix):
    X, y = _blobs()
    model = classifiers.fit(KNNParams(k=1), matrix(X, y))
    np.testing.assert_array_equal(model.predict(X), y)
    # sorted distances from 0.05: 0.05 (A), 0.05 (A), 0.95 (B)
    m3 = classifiers.fit(KNNParams(k=3), matrix([[0.0], [0.1], [1.0]], [0, 0, 1]))
    assert m3.predict(np.array([[0.05]])).tolist() == [0]


def test_knn_tie_breaks(matrix):
    # equidistant neighbours: the lower training index wins the k=1 slot
    m = classifiers.fit(KNNParams(k=1), matrix([[0.0], [1.0]], [2, 1]))
    assert m.predict(np.array([[0.5]])).tolist() == [2]
    # one vote each: lowest class index wins
    m = classifiers.fit(KNNParams(k=2), matrix([[0.0], [1.0]], [2, 1]))
    assert m.predict(np.array([[0.5]])).tolist() == [1]


def _leaf(value, d=1):
    state = dict(feature=[-1], threshold=[0.0], left=[-1], right=[-1], value=[value], decrease=[0.0], n_features=d)
    return DecisionTree.from_state(TreeParams(), state)


def test_forest_majority_vote():
    forest = RandomForest(ForestParams(n_trees=3), [_leaf(0), _leaf(1), _leaf(0)], [0, 1, 2])
    assert forest.predict(np.zeros((1, 1))).tolist() == [0]
    tie = RandomForest(ForestParams(n_trees=2), [_leaf(2), _leaf(1)], [0, 1])
    assert tie.predict(np.zeros((1, 1))).tolist() == [1]


def test_entropy_and_gain():
    assert entropy([5, 5, 0]) == pytest.approx(1.0)
    assert entropy([3, 3, 3]) == pytest.approx(math.log2(3))
    assert entropy([4, 0, 0]) == 0.0
    assert information_gain([4, 4, 0], [[4, 0, 0], [0, 4, 0]]) == pytest.approx(1.0)
    assert information_gain([4, 4, 0], [[2, 2, 0], [2, 2, 0]]) == pytest.approx(0.0)


def test_tree_threshold_is_midpoint(matrix):
    model = classifiers.fit(TreeParams(), matrix([[0.1], [0.3], [0.7], [0.9]], [2, 2, 0, 0]))
    est = model.estimator
    assert est.feature[0] == 0 and est.threshold[0] == pytest.approx(0.5)
    assert model.predict(np.array([[0.5], [0.5000001]])).tolist() == [2, 0]


def test_tree_pre_pruning(matrix):
    X, y = _blobs(n=120)
    assert classifiers.fit(TreeParams(max_depth=1), matrix(X, y)).estimator.depth == 1
    big_leaf = classifiers.fit(TreeParams(min_samples_leaf=30), matrix(X, y)).estimator
    leaves = big_leaf.apply(X)
    assert np.bincount(leaves)[np.unique(leaves)].min() >= 30


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_naive_bayes_posterior(seed):
    X, y = _blobs(n=30, seed=seed % 1000)
    nb = GaussianNB.fit(NaiveBayesParams(), X, y, seed)
    Q = np.random.default_rng(seed).random((10, 3))
    proba = nb.predict_proba(Q)
    np.testing.assert_allclose(proba.sum(axis=1), 1.0, atol=1e-9)
    jll = nb.joint_log_likelihood(Q)
    np.testing.assert_array_equal(np.argmax(jll + 123.0, axis=1), nb.predict(Q))
    assert (nb.variances >= nb.epsilon).all()


def test_naive_bayes_priors_sum_to_one(matrix):
    X, y = _blobs(n=31)
    nb = classifiers.fit(NaiveBayesParams(), matrix(X, y)).estimator
    assert nb.priors.sum() == pytest.approx(1.0, abs=1e-12)


def test_svm_separable_two_class(matrix):
    rng = np.random.default_rng(4)
    X = np.vstack([rng.uniform(0.0, 0.4, (40, 2)), rng.uniform(0.6, 1.0, (40, 2))])
    y = np.array([0] * 40 + [2] * 40)
    accs = [
        (classifiers.fit(SVMParams(C=c, epochs=200), matrix(X, y), seed=0).predict(X) == y).mean()
        for c in (1.0, 10.0, 100.0)
    ]
    assert max(accs) == 1.0


def test_svm_never_predicts_absent_class(matrix):
    X, y = _blobs()
    keep = y != 1
    model = classifiers.fit(SVMParams(epochs=30), matrix(X[keep], y[keep]))
    assert 1 not in set(model.predict(np.random.default_rng(0).random((200, 3))).tolist())


def test_importances_degenerate_cases(matrix):
    X = np.random.default_rng(0).random((10, 4))
    uniform = classifiers.fit(ForestParams(n_trees=3), matrix(X, [0] * 10))
    assert list(feature_importances(uniform).values()) == [0.25] * 4
    Xs = np.column_stack([np.zeros(10), np.linspace(0, 1, 10)])
    ys = [0] * 5 + [1] * 5
    one = classifiers.fit(ForestParams(n_trees=4, bootstrap=False, feature_subsample="all"), matrix(Xs, ys, ["a", "b"]))
    assert feature_importances(one) == {"a": 0.0, "b": 1.0}
    with pytest.raises(ModelError):
        feature_importances(classifiers.fit(TreeParams(), matrix(Xs, ys)))


def test_importance_ranks_signal_over_noise(cohort):
    t, fm = fit_transform(cohort.subset(range(600)), ["java", "pe", "language", "study_time"])
    model = classifiers.fit(ForestParams(n_trees=20, max_depth=6), fm.with_labels(derive_labels(cohort.subset(range(600)))), seed=1)
    imp = feature_importances(model)
    assert sum(imp.values()) == pytest.approx(1.0)
    assert imp["java"] > imp["pe"]


def test_tree_seeds_are_stable():
    assert tree_seeds(7, 3) == tree_seeds(7, 3)
    assert tree_seeds(7, 5)[:3] == tree_seeds(7, 3)
    assert len(set(tree_seeds(7, 50))) == 50


@pytest.mark.parametrize("params", ALL_FAMILIES, ids=lambda p: p.family)
def test_determinism_and_persistence(params, matrix, tmp_path):
    X, y = _blobs(n=150, d=4)
    a = classifiers.fit(params, matrix(X, y), seed=11)
    b = classifiers.fit(params, matrix(X, y), seed=11)
    Q = np.random.default_rng(5).random((300, 4))
    np.testing.assert_array_equal(a.predict(Q), b.predict(Q))
    save_model(a, tmp_path / "m.json")
    loaded, transform = load_model(tmp_path / "m.json")
    assert transform is None
    assert loaded.params == a.params and loaded.feature_names == a.feature_names
    np.testing.assert_array_equal(loaded.predict(Q), a.predict(Q))
    save_model(loaded, tmp_path / "again.json")
    assert (tmp_path / "m.json").read_bytes() == (tmp_path / "again.json").read_bytes()


def test_predict_schema_mismatch(matrix):
    X, y = _blobs()
    model = classifiers.fit(KNNParams(), matrix(X, y, ["a", "b", "c"]))
    with pytest.raises(SchemaError, match="missing c"):
        model.predict(matrix(X[:, :2], None, ["a", "b"]))
    with pytest.raises(SchemaError):
        model.predict(X[:, :2])


def test_fit_rejects_bad_inputs(matrix):
    with pytest.raises(ModelError):
        classifiers.fit(KNNParams(), matrix(np.zeros((0, 2)), []))
    with pytest.raises(ModelError):
        classifiers.fit(KNNParams(), matrix(np.zeros((3, 2))))
    with pytest.raises(ModelError):
        KNNParams(k=0)
    with pytest.raises(ModelError):
        ForestParams(feature_subsample="half")

