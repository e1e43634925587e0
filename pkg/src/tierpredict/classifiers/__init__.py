"""Five from-scratch classifiers behind one fit/predict contract.

``fit(params, matrix, seed)`` returns a :class:`TrainedModel`; the params type
selects the family. Models persist as versioned JSON (see :func:`save_model`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from ..labels import CLASSES
from ..preprocess import FeatureMatrix, FittedTransform, SchemaError
from .base import Estimator, ModelError, Params, check_training_data
from .forest import ForestParams, RandomForest
from .knn import KNN, KNNParams
from .naive_bayes import GaussianNB, NaiveBayesParams
from .svm import LinearSVM, SVMParams
from .tree import DecisionTree, TreeParams

FAMILIES: dict[str, type[Estimator]] = {
    "knn": KNN,
    "nb": GaussianNB,
    "svm": LinearSVM,
    "dt": DecisionTree,
    "rf": RandomForest,
}
FAMILY_NAMES = {
    "knn": "KNN",
    "nb": "Naive Bayes",
    "dt": "Decision Tree",
    "svm": "SVM",
    "rf": "Random Forest",
}

MODEL_FORMAT = "tierpredict-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class TrainedModel:
    params: Params
    estimator: Estimator
    feature_names: tuple[str, ...]
    seed: int
    classes: tuple[str, ...] = CLASSES

    @property
    def family(self) -> str:
        return self.params.family

    def predict(self, rows: FeatureMatrix | np.ndarray) -> np.ndarray:
        return predict(self, rows)


def fit(params: Params, m: FeatureMatrix, seed: int = 0) -> TrainedModel:
    family = FAMILIES.get(params.family)
    if family is None:
        raise ModelError(f"unknown model family {params.family!r}")
    X = np.asarray(m.values, dtype=np.float64)
    y = None if m.labels is None else np.asarray(m.labels, dtype=np.int64)
    check_training_data(X, y)
    est = family.fit(params, X, y, seed)
    return TrainedModel(params, est, tuple(m.columns), int(seed))


def predict(model: TrainedModel, rows: FeatureMatrix | np.ndarray) -> np.ndarray:
    if isinstance(rows, FeatureMatrix):
        if tuple(rows.columns) != model.feature_names:
            missing = [c for c in model.feature_names if c not in rows.columns]
            detail = f"missing {', '.join(missing)}" if missing else f"got {', '.join(rows.columns)}"
            raise SchemaError(f"columns do not match the model's features ({detail})")
        X = rows.values
    else:
        X = np.asarray(rows, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(model.feature_names):
            raise SchemaError(f"expected {len(model.feature_names)} feature columns")
    return np.asarray(model.estimator.predict(X), dtype=np.int64)


def feature_importances(model: TrainedModel) -> dict[str, float]:
    """Mean weighted entropy decrease per feature across the forest, summing to 1."""
    if not isinstance(model.estimator, RandomForest):
        raise ModelError("feature importances are only defined for random forests")
    return dict(zip(model.feature_names, (float(v) for v in model.estimator.importances())))


def params_from_dict(family: str, d: Mapping[str, Any]) -> Params:
    ptype = FAMILIES[family].params_type
    names = {f.name for f in fields(ptype)}
    unknown = set(d) - names
    if unknown:
        raise ModelError(f"unknown {family} parameter(s): {', '.join(sorted(unknown))}")
    return ptype(**d)


def model_to_dict(model: TrainedModel, transform: FittedTransform | None = None) -> dict[str, Any]:
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "family": model.family,
        "params": model.params.to_dict(),
        "feature_names": list(model.feature_names),
        "classes": list(model.classes),
        "seed": str(model.seed),
        "transform": None if transform is None else transform.to_dict(),
        "state": model.estimator.to_state(),
    }


def model_from_dict(d: Mapping[str, Any]) -> tuple[TrainedModel, FittedTransform | None]:
    if d.get("format") != MODEL_FORMAT:
        raise ModelError("not a tierpredict model file")
    if d.get("version") != MODEL_VERSION:
        raise ModelError(f"unsupported model file version {d.get('version')!r}")
    family = d["family"]
    params = params_from_dict(family, d["params"])
    est = FAMILIES[family].from_state(params, d["state"])
    model = TrainedModel(params, est, tuple(d["feature_names"]), int(d["seed"]), tuple(d["classes"]))
    transform = None if d.get("transform") is None else FittedTransform.from_dict(d["transform"])
    return model, transform


def save_model(model: TrainedModel, path: str | Path, transform: FittedTransform | None = None) -> None:
    """Write ``model`` (and optionally its preprocessing transform) as JSON.

    Floats are written with ``repr`` precision, so a reload reproduces every
    prediction exactly.
    """
    text = json.dumps(model_to_dict(model, transform), indent=1, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_model(path: str | Path) -> tuple[TrainedModel, FittedTransform | None]:
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


__all__: Sequence[str] = [
    "DecisionTree",
    "FAMILIES",
    "FAMILY_NAMES",
    "ForestParams",
    "GaussianNB",
    "KNN",
    "KNNParams",
    "LinearSVM",
    "ModelError",
    "NaiveBayesParams",
    "Params",
    "RandomForest",
    "SVMParams",
    "TrainedModel",
    "TreeParams",
    "feature_importances",
    "fit",
    "load_model",
    "params_from_dict",
    "predict",
    "save_model",
]
