"""Mean imputation, gender one-hot coding and min-max scaling.

The transform is fitted once (normally on training rows only) and re-applied
unchanged to every other split, so validation and test data never leak into
the fitted means or ranges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .dataset import FEATURE_COLUMNS, TARGET, Dataset
from .tiering import DEFAULT_THRESHOLDS, Thresholds, assign_tier

GENDER_CODES = {"M": (1.0, 0.0), "F": (0.0, 1.0)}
GENDER_COLUMNS = ("gender_M", "gender_F")


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    columns: tuple[str, ...]
    ids: tuple[str, ...]
    labels: np.ndarray | None = None

    def __post_init__(self):
        if self.values.shape != (len(self.ids), len(self.columns)):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"{len(self.ids)} rows x {len(self.columns)} columns"
            )
        if self.labels is not None and len(self.labels) != len(self.ids):
            raise ValueError("labels are not aligned with rows")

    def __len__(self) -> int:
        return len(self.ids)

    def rows(self, indices) -> "FeatureMatrix":
        idx = np.asarray(indices, dtype=np.int64)
        return FeatureMatrix(
            values=self.values[idx],
            columns=self.columns,
            ids=tuple(self.ids[i] for i in idx),
            labels=None if self.labels is None else self.labels[idx],
        )

    def with_labels(self, labels) -> "FeatureMatrix":
        return FeatureMatrix(self.values, self.columns, self.ids, np.asarray(labels, dtype=np.int64))

    def select(self, columns: Sequence[str]) -> "FeatureMatrix":
        missing = [c for c in columns if c not in self.columns]
        if missing:
            raise SchemaError(f"unknown columns: {', '.join(missing)}")
        idx = [self.columns.index(c) for c in columns]
        return FeatureMatrix(self.values[:, idx], tuple(columns), self.ids, self.labels)


@dataclass(frozen=True)
class FittedTransform:
    columns: tuple[str, ...]  # input columns, in order
    means: Mapping[str, float]
    mins: Mapping[str, float]
    maxs: Mapping[str, float]
    gender_map: Mapping[str, tuple[float, float]] = field(default_factory=lambda: dict(GENDER_CODES))
    warnings: tuple[str, ...] = ()

    @property
    def output_columns(self) -> tuple[str, ...]:
        out: list[str] = []
        for c in self.columns:
            out.extend(GENDER_COLUMNS if c == "gender" else (c,))
        return tuple(out)

    def to_dict(self) -> dict[str, Any]:
        return {
            "columns": list(self.columns),
            "means": dict(self.means),
            "mins": dict(self.mins),
            "maxs": dict(self.maxs),
            "gender_map": {k: list(v) for k, v in self.gender_map.items()},
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "FittedTransform":
        return cls(
            columns=tuple(d["columns"]),
            means=dict(d["means"]),
            mins=dict(d["mins"]),
            maxs=dict(d["maxs"]),
            gender_map={k: tuple(v) for k, v in d["gender_map"].items()},
            warnings=tuple(d.get("warnings", ())),
        )


def _numeric_column(ds: Dataset, name: str) -> np.ndarray:
    return np.array([np.nan if v is None else float(v) for v in ds.column(name)], dtype=np.float64)


def fit(ds: Dataset, columns: Sequence[str] = FEATURE_COLUMNS) -> FittedTransform:
    unknown = [c for c in columns if c not in FEATURE_COLUMNS]
    if unknown:
        raise SchemaError(f"unknown column(s): {', '.join(unknown)}")
    means, mins, maxs, warnings = {}, {}, {}, []
    for c in columns:
        if c == "gender":
            continue
        col = _numeric_column(ds, c)
        present = col[~np.isnan(col)]
        if present.size == 0:
            raise SchemaError(f"column {c!r} has no non-missing values")
        means[c] = float(present.mean())
        mins[c] = float(present.min())
        maxs[c] = float(present.max())
        if mins[c] == maxs[c]:
            warnings.append(f"column {c!r} is constant; scaled to 0")
    return FittedTransform(tuple(columns), means, mins, maxs, warnings=tuple(warnings))


def apply_transform(t: FittedTransform, ds: Dataset) -> FeatureMatrix:
    """Impute with the stored means, scale with the stored ranges, clip to [0, 1]."""
    blocks = []
    for c in t.columns:
        if c == "gender":
            try:
                blocks.append(np.array([t.gender_map[g] for g in ds.column("gender")], dtype=np.float64).reshape(-1, 2))
            except KeyError as exc:
                raise SchemaError(f"gender value {exc.args[0]!r} not in the fitted encoding") from None
            continue
        col = _numeric_column(ds, c)
        col[np.isnan(col)] = t.means[c]
        lo, hi = t.mins[c], t.maxs[c]
        if hi > lo:
            col = np.clip((col - lo) / (hi - lo), 0.0, 1.0)
        else:
            col = np.zeros_like(col)
        blocks.append(col.reshape(-1, 1))
    values = np.hstack(blocks) if blocks else np.zeros((len(ds), 0))
    return FeatureMatrix(values=values.reshape(len(ds), len(t.output_columns)), columns=t.output_columns, ids=ds.ids)


def fit_transform(ds: Dataset, columns: Sequence[str] = FEATURE_COLUMNS) -> tuple[FittedTransform, FeatureMatrix]:
    t = fit(ds, columns)
    return t, apply_transform(t, ds)


def derive_labels(ds: Dataset, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> np.ndarray:
    """Class indices (0=A, 1=B, 2=C) from each record's target score."""
    out = np.empty(len(ds), dtype=np.int64)
    for i, r in enumerate(ds.records):
        if r.microcomputer is None:
            raise SchemaError(f"record {r.student_id!r} has no {TARGET} score")
        out[i] = assign_tier(r.microcomputer, thresholds).index
    return out
