from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..labels import N_CLASSES
from .base import Estimator, ModelError, Params


@dataclass(frozen=True)
class NaiveBayesParams(Params):
    family = "nb"
    var_smoothing: float = 1e-9

    def __post_init__(self):
        if not self.var_smoothing > 0:
            raise ModelError("var_smoothing must be > 0")


class GaussianNB(Estimator):
    """Gaussian naive Bayes with per-class, per-feature mean and variance.

    Every variance gets ``epsilon = var_smoothing * max feature variance``
    added (or ``var_smoothing`` itself when all features are constant).
    Classes never seen in training have prior 0 and cannot be predicted.
    """

    params_type = NaiveBayesParams

    def __init__(self, params, priors, means, variances, epsilon):
        self.params = params
        self.priors = priors
        self.means = means
        self.variances = variances
        self.epsilon = epsilon

    @classmethod
    def fit(cls, params, X, y, seed):
        n, d = X.shape
        max_var = float(X.var(axis=0).max()) if d else 0.0
        eps = params.var_smoothing * (max_var if max_var > 0 else 1.0)
        priors = np.zeros(N_CLASSES)
        means = np.zeros((N_CLASSES, d))
        variances = np.ones((N_CLASSES, d))
        for c in range(N_CLASSES):
            rows = X[y == c]
            if len(rows) == 0:
                continue
            priors[c] = len(rows) / n
            means[c] = rows.mean(axis=0)
            variances[c] = rows.var(axis=0) + eps
        return cls(params, priors, means, variances, eps)

    def joint_log_likelihood(self, X: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            log_prior = np.log(self.priors)
        ll = -0.5 * (
            np.log(2.0 * np.pi * self.variances)[None, :, :]
            + (X[:, None, :] - self.means[None, :, :]) ** 2 / self.variances[None, :, :]
        ).sum(axis=2)
        return ll + log_prior[None, :]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        jll = self.joint_log_likelihood(X)
        top = jll.max(axis=1, keepdims=True)
        p = np.exp(jll - top)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, X):
        if len(X) == 0:
            return np.empty(0, dtype=np.int64)
        return self.joint_log_likelihood(X).argmax(axis=1)

    def to_state(self):
        return {
            "priors": self.priors.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "epsilon": self.epsilon,
        }

    @classmethod
    def from_state(cls, params, state):
        return cls(
            params,
            np.array(state["priors"], dtype=np.float64),
            np.array(state["means"], dtype=np.float64).reshape(N_CLASSES, -1),
            np.array(state["variances"], dtype=np.float64).reshape(N_CLASSES, -1),
            float(state["epsilon"]),
        )
