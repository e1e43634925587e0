"""Entropy decision tree grown greedily with pre-pruning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..labels import N_CLASSES
from .base import Estimator, ModelError, Params

MIN_GAIN = 1e-12


@dataclass(frozen=True)
class TreeParams(Params):
    family = "dt"
    max_depth: int | None = None
    min_samples_leaf: int = 1

    def __post_init__(self):
        if self.max_depth is not None and self.max_depth < 1:
            raise ModelError("max_depth must be >= 1 or None")
        if self.min_samples_leaf < 1:
            raise ModelError("min_samples_leaf must be >= 1")


def entropy(counts) -> np.ndarray:
    """Shannon entropy in bits of class-count vectors along the last axis."""
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum(axis=-1, keepdims=True)
    p = counts / np.where(n == 0, 1.0, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(np.where(p > 0, p, 1.0)), 0.0)
    return -terms.sum(axis=-1)


def information_gain(parent, children) -> float:
    parent = np.asarray(parent, dtype=np.float64)
    n = parent.sum()
    return float(entropy(parent) - sum(np.sum(c) / n * entropy(c) for c in children))


def _xlogx(a: np.ndarray) -> np.ndarray:
    return a * np.log2(np.where(a > 0, a, 1.0))


@dataclass
class _Split:
    feature: int
    threshold: float
    gain: float


def best_split(X: np.ndarray, y: np.ndarray, features, min_leaf: int, onehot: np.ndarray | None = None) -> _Split | None:
    """Highest-gain ``x[f] <= t`` split over midpoints of consecutive distinct values.

    Ties go to the lowest feature index, then the lowest threshold.
    """
    m = len(y)
    if m < 2 * min_leaf:
        return None
    feats = np.sort(np.asarray(features, dtype=np.int64))
    xs = X[:, feats]
    order = np.argsort(xs, axis=0, kind="stable")
    cols = np.arange(len(feats))
    sx = xs[order, cols]
    if onehot is None:
        onehot = np.eye(N_CLASSES)[y]
    left = np.cumsum(onehot[order], axis=0)[:-1]  # (m-1, f, K)
    total = onehot.sum(axis=0)
    right = total - left
    nl = np.arange(1, m, dtype=np.float64)[:, None]
    nr = m - nl
    # n * H(counts) == n log n - sum(c log c); avoids normalising every candidate
    child = (_xlogx(nl) - _xlogx(left).sum(axis=2)) + (_xlogx(nr) - _xlogx(right).sum(axis=2))
    gain = float(entropy(total)) - child / m
    valid = sx[:-1] < sx[1:]
    valid &= (nl >= min_leaf) & (nr >= min_leaf)
    gain = np.where(valid, gain, -np.inf)
    pos = gain.argmax(axis=0)  # first maximum -> lowest threshold
    per_feat = gain[pos, cols]
    j = int(per_feat.argmax())  # first maximum -> lowest feature
    g = float(per_feat[j])
    if not g > MIN_GAIN:
        return None
    i = int(pos[j])
    lo, hi = sx[i, j], sx[i + 1, j]
    thr = (lo + hi) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return _Split(int(feats[j]), float(thr), g)


class DecisionTree(Estimator):
    """Binary tree stored as flat arrays; ``feature == -1`` marks a leaf.

    Growth stops at ``max_depth``, at pure nodes, when a node cannot produce two
    children of ``min_samples_leaf`` rows, or when no split has positive gain.
    Rows with ``x[feature] <= threshold`` go left.
    """

    params_type = TreeParams

    def __init__(self, params, feature, threshold, left, right, value, decrease, n_features):
        self.params = params
        self.feature = feature
        self.threshold = threshold
        self.left = left
        self.right = right
        self.value = value
        self.decrease = decrease  # weighted impurity decrease at each split node
        self.n_features = n_features

    @classmethod
    def fit(cls, params, X, y, seed, max_features: int | None = None, rng=None):
        n, d = X.shape
        if max_features is not None and max_features < d and rng is None:
            rng = np.random.default_rng(seed)
        feature, threshold, left, right, value, decrease = [], [], [], [], [], []

        def new_node():
            for arr in (feature, left, right, value):
                arr.append(-1)
            threshold.append(0.0)
            decrease.append(0.0)
            return len(feature) - 1

        onehot = np.eye(N_CLASSES)[y]
        all_feats = np.arange(d)
        root = new_node()
        stack = [(root, np.arange(n), 0)]
        while stack:
            node, idx, depth = stack.pop()
            yn = y[idx]
            counts = np.bincount(yn, minlength=N_CLASSES)
            value[node] = int(counts.argmax())
            if (params.max_depth is not None and depth >= params.max_depth) or np.count_nonzero(counts) <= 1:
                continue
            if max_features is not None and max_features < d:
                feats = rng.choice(d, size=max_features, replace=False)
            else:
                feats = all_feats
            split = best_split(X[idx], yn, feats, params.min_samples_leaf, onehot[idx])
            if split is None:
                continue
            feature[node] = split.feature
            threshold[node] = split.threshold
            decrease[node] = len(idx) / n * split.gain
            go_left = X[idx, split.feature] <= split.threshold
            l, r = new_node(), new_node()
            left[node], right[node] = l, r
            # right pushed first so the left subtree is numbered first
            stack.append((r, idx[~go_left], depth + 1))
            stack.append((l, idx[go_left], depth + 1))

        return cls(
            params,
            np.array(feature, dtype=np.int64),
            np.array(threshold, dtype=np.float64),
            np.array(left, dtype=np.int64),
            np.array(right, dtype=np.int64),
            np.array(value, dtype=np.int64),
            np.array(decrease, dtype=np.float64),
            d,
        )

    @property
    def depth(self) -> int:
        depths = np.zeros(len(self.feature), dtype=np.int64)
        for node in range(len(self.feature)):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def apply(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        while True:
            f = self.feature[node]
            active = f >= 0
            if not active.any():
                return node
            a = rows[active]
            na = node[active]
            go_left = X[a, f[active]] <= self.threshold[na]
            node[a] = np.where(go_left, self.left[na], self.right[na])

    def predict(self, X):
        return self.value[self.apply(X)]

    def importances(self) -> np.ndarray:
        out = np.zeros(self.n_features)
        splits = self.feature >= 0
        np.add.at(out, self.feature[splits], self.decrease[splits])
        return out

    def to_state(self):
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
            "decrease": self.decrease.tolist(),
            "n_features": self.n_features,
        }

    @classmethod
    def from_state(cls, params, state):
        return cls(
            params,
            np.array(state["feature"], dtype=np.int64),
            np.array(state["threshold"], dtype=np.float64),
            np.array(state["left"], dtype=np.int64),
            np.array(state["right"], dtype=np.int64),
            np.array(state["value"], dtype=np.int64),
            np.array(state["decrease"], dtype=np.float64),
            int(state["n_features"]),
        )


def sqrt_features(d: int) -> int:
    return max(1, int(math.isqrt(d)))
