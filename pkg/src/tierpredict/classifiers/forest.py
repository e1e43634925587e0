from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..labels import N_CLASSES
from .base import Estimator, ModelError, Params
from .tree import DecisionTree, TreeParams, sqrt_features


@dataclass(frozen=True)
class ForestParams(Params):
    family = "rf"
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_leaf: int = 1
    feature_subsample: str = "sqrt"
    bootstrap: bool = True

    def __post_init__(self):
        if self.n_trees < 1:
            raise ModelError("n_trees must be >= 1")
        if self.feature_subsample not in ("sqrt", "all"):
            raise ModelError("feature_subsample must be 'sqrt' or 'all'")
        TreeParams(self.max_depth, self.min_samples_leaf)

    @property
    def tree_params(self) -> TreeParams:
        return TreeParams(self.max_depth, self.min_samples_leaf)


def tree_seeds(seed: int, n_trees: int) -> list[int]:
    """Per-tree seeds: child ``i`` of ``SeedSequence(seed)``, collapsed to 64 bits."""
    children = np.random.SeedSequence(seed).spawn(n_trees)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


class RandomForest(Estimator):
    """Bagged entropy trees with per-split feature subsampling.

    Tree ``i`` draws its bootstrap rows and split candidates from its own
    generator seeded by ``tree_seeds(seed)[i]``, so trees are independent of
    training order. Prediction is a plain majority vote, ties to the lowest class.
    """

    params_type = ForestParams

    def __init__(self, params, trees, seeds):
        self.params = params
        self.trees = trees
        self.seeds = seeds

    @classmethod
    def fit(cls, params, X, y, seed):
        n, d = X.shape
        max_features = sqrt_features(d) if params.feature_subsample == "sqrt" else None
        seeds = tree_seeds(seed, params.n_trees)
        trees = []
        for s in seeds:
            rng = np.random.default_rng(s)
            if params.bootstrap:
                rows = rng.integers(0, n, size=n)
                Xs, ys = X[rows], y[rows]
            else:
                Xs, ys = X, y
            trees.append(DecisionTree.fit(params.tree_params, Xs, ys, s, max_features=max_features, rng=rng))
        return cls(params, trees, seeds)

    def votes(self, X: np.ndarray) -> np.ndarray:
        counts = np.zeros((len(X), N_CLASSES), dtype=np.int64)
        rows = np.arange(len(X))
        for t in self.trees:
            np.add.at(counts, (rows, t.predict(X)), 1)
        return counts

    def predict(self, X):
        return self.votes(X).argmax(axis=1)

    def importances(self) -> np.ndarray:
        d = self.trees[0].n_features
        total = np.mean([t.importances() for t in self.trees], axis=0)
        s = total.sum()
        return total / s if s > 0 else np.full(d, 1.0 / d)

    def to_state(self):
        return {"seeds": [str(s) for s in self.seeds], "trees": [t.to_state() for t in self.trees]}

    @classmethod
    def from_state(cls, params, state):
        tp = params.tree_params
        return cls(params, [DecisionTree.from_state(tp, t) for t in state["trees"]], [int(s) for s in state["seeds"]])
