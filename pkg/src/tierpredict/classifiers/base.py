from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, ClassVar, Mapping

import numpy as np

from ..labels import N_CLASSES


class ModelError(ValueError):
    pass


@dataclass(frozen=True)
class Params:
    family: ClassVar[str] = ""

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def describe(self) -> str:
        return ",".join(f"{k}={v}" for k, v in self.to_dict().items())


class Estimator:
    """Fitted state of one classifier family.

    Subclasses implement ``fit`` (a classmethod returning a new instance),
    ``predict`` over a float matrix and a JSON-safe ``to_state``/``from_state``.
    """

    params_type: ClassVar[type[Params]]

    @classmethod
    def fit(cls, params: Params, X: np.ndarray, y: np.ndarray, seed: int) -> "Estimator":
        raise NotImplementedError

    def predict(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_state(self) -> dict[str, Any]:
        raise NotImplementedError

    @classmethod
    def from_state(cls, params: Params, state: Mapping[str, Any]) -> "Estimator":
        raise NotImplementedError


def vote(labels: np.ndarray, n_classes: int = N_CLASSES) -> int:
    """Majority class; ties go to the lowest class index."""
    return int(np.argmax(np.bincount(labels, minlength=n_classes)))


def check_training_data(X: np.ndarray, y: np.ndarray) -> None:
    if X.ndim != 2 or X.shape[0] == 0:
        raise ModelError("training matrix is empty")
    if y is None or len(y) != X.shape[0]:
        raise ModelError(f"labels ({None if y is None else len(y)}) do not match rows ({X.shape[0]})")
    if len(y) and (y.min() < 0 or y.max() >= N_CLASSES):
        raise ModelError("labels must be class indices 0..2")
