from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..labels import N_CLASSES
from .base import Estimator, ModelError, Params

_CHUNK = 256


@dataclass(frozen=True)
class KNNParams(Params):
    family = "knn"
    k: int = 5

    def __post_init__(self):
        if self.k < 1:
            raise ModelError("k must be >= 1")


class KNN(Estimator):
    """Majority vote of the ``k`` nearest training rows (Euclidean).

    Equal distances are ranked by training-row order; vote ties go to the
    lowest class index.
    """

    params_type = KNNParams

    def __init__(self, params: KNNParams, X: np.ndarray, y: np.ndarray):
        self.params = params
        self.X = X
        self.y = y

    @classmethod
    def fit(cls, params, X, y, seed):
        return cls(params, np.array(X, dtype=np.float64), np.array(y, dtype=np.int64))

    def neighbours(self, Q: np.ndarray) -> np.ndarray:
        k = min(self.params.k, len(self.X))
        out = np.empty((len(Q), k), dtype=np.int64)
        for start in range(0, len(Q), _CHUNK):
            q = Q[start : start + _CHUNK]
            d2 = ((q[:, None, :] - self.X[None, :, :]) ** 2).sum(axis=2)
            out[start : start + len(q)] = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return out

    def predict(self, X):
        if len(X) == 0:
            return np.empty(0, dtype=np.int64)
        nb = self.y[self.neighbours(X)]
        counts = np.zeros((len(X), N_CLASSES), dtype=np.int64)
        for c in range(N_CLASSES):
            counts[:, c] = (nb == c).sum(axis=1)
        return counts.argmax(axis=1)

    def to_state(self):
        return {"X": self.X.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_state(cls, params, state):
        X = np.array(state["X"], dtype=np.float64).reshape(len(state["y"]), -1)
        return cls(params, X, np.array(state["y"], dtype=np.int64))
