"""Train/validation/test splitting, k-fold CV, grid search and learning curves."""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import classifiers
from .classifiers import Params
from .metrics import (  # noqa: F401  (re-exported)
    ConfusionMatrix,
    EvalMetrics,
    accuracy,
    binary_metrics,
    confusion,
    f_measure,
    metrics,
)
from .preprocess import FeatureMatrix
from .seeds import derive_seed

PART_FRACTIONS = (0.6, 0.2, 0.2)
PART_NAMES = ("train", "validation", "test")


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray
    seed: int
    stratified: bool

    @property
    def parts(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.train, self.validation, self.test


def part_sizes(n: int) -> tuple[int, int, int]:
    """60/20/20 sizes: validation and test are ``round(0.2 n)`` (half-up), train takes the rest."""
    small = math.floor(0.2 * n + 0.5)
    return n - 2 * small, small, small


def _allocate(class_sizes: Sequence[int], totals: Sequence[int]) -> list[list[int]]:
    """Per-class part sizes, each the floor or ceiling of its exact share, meeting ``totals``.

    Floors are assigned first; the leftover rows of each class go to distinct
    parts. Candidates are enumerated in a fixed order and the first choice that
    meets every part total wins.
    """
    floors = [[math.floor(n_c * q) for q in PART_FRACTIONS] for n_c in class_sizes]
    extra = [n_c - sum(f) for n_c, f in zip(class_sizes, floors)]
    need = [t - sum(f[p] for f in floors) for p, t in enumerate(totals)]
    options = [list(itertools.combinations(range(3), e)) for e in extra]
    for choice in itertools.product(*options):
        got = [0, 0, 0]
        for parts in choice:
            for p in parts:
                got[p] += 1
        if got == need:
            alloc = [list(f) for f in floors]
            for c, parts in enumerate(choice):
                for p in parts:
                    alloc[c][p] += 1
            return alloc
    raise RuntimeError("no stratified allocation meets the part sizes")  # unreachable for 3 parts


def split(n_rows: int, labels=None, seed: int = 0, stratified: bool = True) -> SplitIndices:
    """Seeded 60/20/20 partition of ``range(n_rows)``.

    With ``stratified`` each class's rows are shuffled separately and every
    part receives the floor or ceiling of that class's exact share.
    """
    if n_rows < 5:
        raise ValueError(f"need at least 5 rows to populate train/validation/test, got {n_rows}")
    totals = part_sizes(n_rows)
    rng = np.random.default_rng(seed)
    if not stratified or labels is None:
        perm = rng.permutation(n_rows)
        a, b = totals[0], totals[0] + totals[1]
        parts = [perm[:a], perm[a:b], perm[b:]]
    else:
        labels = np.asarray(labels)
        if len(labels) != n_rows:
            raise ValueError("labels are not aligned with rows")
        classes = np.unique(labels)
        members = [np.flatnonzero(labels == c) for c in classes]
        alloc = _allocate([len(m) for m in members], totals)
        parts = [[], [], []]
        for idx, sizes in zip(members, alloc):
            shuffled = rng.permutation(idx)
            start = 0
            for p, size in enumerate(sizes):
                parts[p].append(shuffled[start : start + size])
                start += size
        parts = [np.concatenate(p) if p else np.empty(0, dtype=np.int64) for p in parts]
    tr, va, te = (np.sort(np.asarray(p, dtype=np.int64)) for p in parts)
    return SplitIndices(tr, va, te, seed, bool(stratified and labels is not None))


def kfold(n_rows: int, k: int = 10, seed: int = 0) -> list[np.ndarray]:
    """Seeded partition into ``k`` folds whose sizes differ by at most one."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > n_rows:
        raise ValueError(f"k={k} exceeds the number of rows ({n_rows})")
    perm = np.random.default_rng(seed).permutation(n_rows)
    return [np.sort(f) for f in np.array_split(perm, k)]


def evaluate(model: classifiers.TrainedModel, m: FeatureMatrix) -> tuple[EvalMetrics, ConfusionMatrix]:
    cm = confusion(m.labels, model.predict(m))
    return metrics(cm), cm


@dataclass(frozen=True)
class GridSearchResult:
    entries: tuple[tuple[Params, float], ...]
    best: Params
    best_accuracy: float


def grid_search(grid: Sequence[Params], train: FeatureMatrix, validation: FeatureMatrix, seed: int = 0) -> GridSearchResult:
    """Fit every config on ``train`` and keep the best validation accuracy (first wins ties)."""
    if not grid:
        raise ValueError("grid is empty")
    entries = []
    best, best_acc = None, -1.0
    for params in grid:
        model = classifiers.fit(params, train, seed)
        acc = accuracy(validation.labels, model.predict(validation))
        entries.append((params, acc))
        if acc > best_acc:
            best, best_acc = params, acc
    return GridSearchResult(tuple(entries), best, best_acc)


@dataclass(frozen=True)
class CVResult:
    folds: tuple[EvalMetrics, ...]
    mean: dict[str, float]
    std: dict[str, float]


_METRIC_FIELDS = ("accuracy", "precision", "recall", "f_measure")


def cross_validate(params: Params, m: FeatureMatrix, k: int = 10, seed: int = 0) -> CVResult:
    """k-fold CV: fit on k-1 folds, score the held-out fold; population std across folds."""
    folds = kfold(len(m), k, derive_seed(seed, "kfold"))
    everything = np.arange(len(m))
    results = []
    for i, held in enumerate(folds):
        train_idx = np.setdiff1d(everything, held, assume_unique=True)
        model = classifiers.fit(params, m.rows(train_idx), derive_seed(seed, "fold", i))
        results.append(evaluate(model, m.rows(held))[0])
    mean = {f: statistics.fmean(getattr(r, f) for r in results) for f in _METRIC_FIELDS}
    std = {f: statistics.pstdev([getattr(r, f) for r in results]) for f in _METRIC_FIELDS}
    return CVResult(tuple(results), mean, std)


def learning_curve(
    params: Params,
    train: FeatureMatrix,
    fractions: Sequence[float],
    validation: FeatureMatrix,
    seed: int = 0,
) -> list[tuple[float, float]]:
    """Validation accuracy after fitting on growing prefixes of one seeded shuffle of ``train``."""
    if not fractions:
        raise ValueError("fraction list is empty")
    n = len(train)
    for f in fractions:
        if not 0.0 < f <= 1.0:
            raise ValueError(f"fraction {f} outside (0, 1]")
        if math.floor(f * n) < 1:
            raise ValueError(f"fraction {f} of {n} rows selects no rows")
    order = np.random.default_rng(derive_seed(seed, "curve")).permutation(n)
    points = []
    for f in sorted(fractions):
        rows = train.rows(order[: math.floor(f * n)])
        model = classifiers.fit(params, rows, seed)
        points.append((float(f), accuracy(validation.labels, model.predict(validation))))
    return points


def format_table(results: dict[str, EvalMetrics]) -> str:
    """Method / Accuracy / Precision / Recall / F-measure table, percentages to 2 decimals."""
    header = ("Method", "Accuracy", "Precision", "Recall", "F-measure")
    rows = [(name,) + m.as_percentages() for name, m in results.items()]
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    lines = []
    for r in [header] + rows:
        cells = [r[0].ljust(widths[0])] + [c.rjust(w) for c, w in zip(r[1:], widths[1:])]
        lines.append("  ".join(cells))
    return "\n".join(lines) + "\n"
