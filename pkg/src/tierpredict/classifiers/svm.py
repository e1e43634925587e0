from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..labels import N_CLASSES
from .base import Estimator, ModelError, Params


@dataclass(frozen=True)
class SVMParams(Params):
    family = "svm"
    C: float = 1.0
    epochs: int = 200
    batch_size: int = 32

    def __post_init__(self):
        if not self.C > 0:
            raise ModelError("C must be > 0")
        if self.epochs < 1:
            raise ModelError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ModelError("batch_size must be >= 1")


class LinearSVM(Estimator):
    """One-vs-rest linear SVM trained on the L2-regularised hinge loss.

    Minimises ``lam/2 * |w|^2 + mean(max(0, 1 - y * w.x))`` per class with
    ``lam = 1 / (C * n)``, using mini-batch subgradient steps of size
    ``1 / (lam * t)`` and projection onto the ball of radius ``1/sqrt(lam)``
    (Pegasos). The bias is a constant input column, regularised like the
    weights. Rows are reshuffled every epoch from the seeded generator.
    """

    params_type = SVMParams

    def __init__(self, params, weights, present):
        self.params = params
        self.weights = weights  # (N_CLASSES, d + 1); last column is the bias
        self.present = present

    @classmethod
    def fit(cls, params, X, y, seed):
        n, d = X.shape
        present = np.bincount(y, minlength=N_CLASSES) > 0
        Xa = np.hstack([X, np.ones((n, 1))])
        Y = np.where(y[:, None] == np.arange(N_CLASSES)[None, :], 1.0, -1.0)
        W = np.zeros((N_CLASSES, d + 1))
        if present.sum() > 1:
            lam = 1.0 / (params.C * n)
            radius = 1.0 / math.sqrt(lam)
            rng = np.random.default_rng(seed)
            t = 0
            bs = params.batch_size
            for _ in range(params.epochs):
                order = rng.permutation(n)
                for start in range(0, n, bs):
                    b = order[start : start + bs]
                    t += 1
                    eta = 1.0 / (lam * t)
                    xb, yb = Xa[b], Y[b]
                    viol = (yb * (xb @ W.T)) < 1.0
                    W *= 1.0 - eta * lam
                    W += (eta / len(b)) * ((viol * yb).T @ xb)
                    norms = np.linalg.norm(W, axis=1)
                    over = norms > radius
                    if over.any():
                        W[over] *= (radius / norms[over])[:, None]
        return cls(params, W, present)

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        scores = X @ self.weights[:, :-1].T + self.weights[:, -1]
        scores[:, ~self.present] = -np.inf
        return scores

    def predict(self, X):
        if len(X) == 0:
            return np.empty(0, dtype=np.int64)
        return self.decision_function(X).argmax(axis=1)

    def to_state(self):
        return {"weights": self.weights.tolist(), "present": self.present.tolist()}

    @classmethod
    def from_state(cls, params, state):
        return cls(
            params,
            np.array(state["weights"], dtype=np.float64).reshape(N_CLASSES, -1),
            np.array(state["present"], dtype=bool),
        )
