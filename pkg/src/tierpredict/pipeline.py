"""End-to-end training protocol shared by the CLI and the acceptance suite.

1. Derive tier labels and make a stratified 60/20/20 split.
2. Pick features by correlation on the training rows (or take an explicit list).
3. Fit the preprocessing transform on training rows; apply it to all three parts.
4. Per family: grid search on validation accuracy, 10-fold CV of the winner on
   the training rows, a learning curve, and a final fit scored on the test rows.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

from . import classifiers
from .classifiers import ForestParams, KNNParams, NaiveBayesParams, Params, SVMParams, TreeParams
from .correlation import DEFAULT_THRESHOLD, REFERENCE_FEATURES, dataset_correlations, select_features
from .dataset import Dataset
from .evaluation import (
    ConfusionMatrix,
    CVResult,
    EvalMetrics,
    GridSearchResult,
    cross_validate,
    evaluate,
    grid_search,
    learning_curve,
    split,
)
from .preprocess import FittedTransform, derive_labels, fit, apply_transform
from .seeds import derive_seed

log = logging.getLogger(__name__)

FAMILY_ORDER = ("knn", "nb", "dt", "svm", "rf")

DEFAULT_GRIDS: dict[str, tuple[Params, ...]] = {
    "knn": tuple(KNNParams(k) for k in (1, 3, 5, 7, 9, 15, 21, 31)),
    "nb": tuple(NaiveBayesParams(v) for v in (1e-9, 1e-6, 1e-3, 1e-2)),
    "dt": tuple(TreeParams(d, leaf) for d in (3, 4, 5, 6, 8) for leaf in (1, 5, 20)),
    "svm": tuple(SVMParams(C) for C in (0.1, 1.0, 10.0, 100.0)),
    "rf": tuple(
        ForestParams(n_trees=60, max_depth=d, min_samples_leaf=leaf) for d in (6, 10) for leaf in (1, 5)
    ),
}
LEARNING_FRACTIONS = (0.1, 0.25, 0.5, 0.75, 1.0)


@dataclass
class FamilyResult:
    family: str
    grid: GridSearchResult
    model: classifiers.TrainedModel
    test_metrics: EvalMetrics
    test_confusion: ConfusionMatrix
    cv: CVResult | None = None
    curve: list[tuple[float, float]] = field(default_factory=list)


@dataclass
class TrainingRun:
    seed: int
    features: tuple[str, ...]
    transform: FittedTransform
    split_sizes: tuple[int, int, int]
    majority_baseline: float
    results: dict[str, FamilyResult]


def choose_features(ds: Dataset, features: str | Sequence[str], threshold: float) -> tuple[str, ...]:
    """``"auto"`` selects by |r| >= threshold, ``"reference"`` returns the fixed six-feature set, otherwise the list itself."""
    if isinstance(features, str):
        if features == "reference":
            return REFERENCE_FEATURES
        if features != "auto":
            return tuple(f.strip() for f in features.split(",") if f.strip())
        sel = select_features(dataset_correlations(ds), threshold=threshold)
        if not sel.selected:
            raise ValueError(f"no feature reaches |r| >= {threshold}")
        return sel.selected
    return tuple(features)


def train_families(
    ds: Dataset,
    seed: int,
    families: Sequence[str] = FAMILY_ORDER,
    features: str | Sequence[str] = "auto",
    threshold: float = DEFAULT_THRESHOLD,
    grids: dict[str, Sequence[Params]] | None = None,
    cv_folds: int | None = 10,
    curve_fractions: Sequence[float] | None = LEARNING_FRACTIONS,
) -> TrainingRun:
    grids = {**DEFAULT_GRIDS, **(grids or {})}
    labels = derive_labels(ds)
    parts = split(len(ds), labels, derive_seed(seed, "split"), stratified=True)
    train_ds, val_ds, test_ds = (ds.subset(p) for p in parts.parts)

    cols = choose_features(train_ds, features, threshold)
    transform = fit(train_ds, cols)
    train_m, val_m, test_m = (
        apply_transform(transform, d).with_labels(labels[p]) for d, p in zip((train_ds, val_ds, test_ds), parts.parts)
    )
    counts = [int((labels[parts.train] == c).sum()) for c in range(3)]
    baseline_class = max(range(3), key=lambda c: (counts[c], -c))
    baseline = float((labels[parts.test] == baseline_class).mean())

    results = {}
    for fam in families:
        fseed = derive_seed(seed, fam)
        log.info("grid search for %s", fam)
        gs = grid_search(grids[fam], train_m, val_m, fseed)
        model = classifiers.fit(gs.best, train_m, fseed)
        test_metrics, cm = evaluate(model, test_m)
        res = FamilyResult(fam, gs, model, test_metrics, cm)
        if cv_folds:
            res.cv = cross_validate(gs.best, train_m, cv_folds, fseed)
        if curve_fractions:
            res.curve = learning_curve(gs.best, train_m, curve_fractions, val_m, fseed)
        results[fam] = res
    return TrainingRun(seed, cols, transform, tuple(len(p) for p in parts.parts), baseline, results)
