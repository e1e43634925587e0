"""Pearson correlations, heatmap output and threshold feature selection."""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .dataset import FEATURE_COLUMNS, TARGET, Dataset
from .preprocess import FeatureMatrix, fit_transform

# Columns kept by the original study; usable as an explicit override.
REFERENCE_FEATURES = ("mathematics", "database", "java", "computer_network", "study_time", "attendance")
DEFAULT_THRESHOLD = 0.3


class CorrelationError(ValueError):
    pass


def pearson(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise CorrelationError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise CorrelationError("need at least two observations")
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = xc @ xc
    syy = yc @ yc
    if sxx == 0.0 or syy == 0.0:
        raise CorrelationError("correlation undefined for a constant vector")
    r = (xc @ yc) / math.sqrt(sxx * syy)
    return float(min(1.0, max(-1.0, r)))


@dataclass(frozen=True)
class CorrelationMatrix:
    names: tuple[str, ...]
    values: np.ndarray
    excluded: tuple[str, ...] = ()

    def __getitem__(self, key: tuple[str, str]) -> float:
        a, b = key
        return float(self.values[self.names.index(a), self.names.index(b)])

    def against(self, target: str) -> dict[str, float]:
        j = self.names.index(target)
        return {n: float(self.values[i, j]) for i, n in enumerate(self.names) if n != target}


def correlation_matrix(values, names: Sequence[str]) -> CorrelationMatrix:
    """Pairwise Pearson matrix over the columns of ``values``.

    Constant columns are dropped (listed in ``excluded``) with a warning.
    """
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 2 or values.shape[1] != len(names):
        raise CorrelationError("values must be 2-D with one column per name")
    if values.shape[0] < 2:
        raise CorrelationError("need at least two rows")
    keep = [j for j in range(values.shape[1]) if np.ptp(values[:, j]) > 0]
    excluded = tuple(names[j] for j in range(len(names)) if j not in keep)
    if excluded:
        warnings.warn(f"constant columns excluded from correlation: {', '.join(excluded)}", stacklevel=2)
    cols = values[:, keep]
    centred = cols - cols.mean(axis=0)
    k = len(keep)
    out = np.eye(k)
    for i in range(k):
        for j in range(i + 1, k):
            r = pearson_centred(centred[:, i], centred[:, j])
            out[i, j] = out[j, i] = r
    return CorrelationMatrix(tuple(names[j] for j in keep), out, excluded)


def pearson_centred(xc: np.ndarray, yc: np.ndarray) -> float:
    r = (xc @ yc) / math.sqrt((xc @ xc) * (yc @ yc))
    return min(1.0, max(-1.0, float(r)))


def analysis_columns(ds: Dataset, columns: Sequence[str] = FEATURE_COLUMNS) -> tuple[np.ndarray, tuple[str, ...]]:
    """Imputed feature columns plus the target, for correlation analysis.

    Gender enters as a single 0/1 column (male 0, female 1); scaling is
    irrelevant to Pearson r, so the normalized matrix is used as-is.
    """
    if not ds.has_target:
        raise CorrelationError(f"every record needs a {TARGET} score for correlation analysis")
    _, fm = fit_transform(ds, columns)
    names = list(fm.columns)
    values = fm.values
    if "gender_M" in names:
        drop = names.index("gender_M")
        values = np.delete(values, drop, axis=1)
        names.pop(drop)
        names[names.index("gender_F")] = "gender"
    target = np.array(ds.column(TARGET), dtype=np.float64).reshape(-1, 1)
    return np.hstack([values, target]), tuple(names) + (TARGET,)


def dataset_correlations(ds: Dataset) -> CorrelationMatrix:
    values, names = analysis_columns(ds)
    return correlation_matrix(values, names)


def matrix_with_target(fm: FeatureMatrix, target, name: str = TARGET) -> CorrelationMatrix:
    values = np.hstack([fm.values, np.asarray(target, dtype=np.float64).reshape(-1, 1)])
    return correlation_matrix(values, fm.columns + (name,))


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[str, ...]
    r: Mapping[str, float]
    threshold: float | None
    override: bool = False

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "override": self.override,
            "selected": [{"column": c, "r": round(self.r[c], 6)} for c in self.selected],
        }


def _rank(cols, r):
    return sorted(cols, key=lambda c: (-abs(r[c]), c))


def select_features(
    cm: CorrelationMatrix,
    target: str = TARGET,
    threshold: float = DEFAULT_THRESHOLD,
    override: Sequence[str] | None = None,
) -> SelectionResult:
    """Keep columns with ``|r(column, target)| >= threshold``, ordered by descending |r| then name."""
    if target not in cm.names:
        raise CorrelationError(f"unknown target {target!r}")
    r = cm.against(target)
    if override is not None:
        unknown = [c for c in override if c not in r]
        if unknown:
            raise CorrelationError(f"override names unknown column(s): {', '.join(unknown)}")
        chosen = list(dict.fromkeys(override))
        return SelectionResult(tuple(_rank(chosen, r)), {c: r[c] for c in chosen}, None, override=True)
    if not 0.0 < threshold <= 1.0:
        raise CorrelationError("threshold must lie in (0, 1]")
    chosen = [c for c in r if abs(r[c]) >= threshold]
    return SelectionResult(tuple(_rank(chosen, r)), {c: r[c] for c in chosen}, threshold)


# -- output -------------------------------------------------------------------

# Diverging ramp: -1 -> blue, 0 -> white, +1 -> red.
RAMP_NEG = (33, 102, 172)
RAMP_MID = (247, 247, 247)
RAMP_POS = (178, 24, 43)


def ramp_color(r: float) -> str:
    r = min(1.0, max(-1.0, r))
    end = RAMP_POS if r >= 0 else RAMP_NEG
    t = abs(r)
    rgb = tuple(round(m + (e - m) * t) for m, e in zip(RAMP_MID, end))
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def write_matrix_csv(cm: CorrelationMatrix, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + list(cm.names))
        for name, row in zip(cm.names, cm.values):
            w.writerow([name] + [f"{v:.6f}" for v in row])


def render_svg(cm: CorrelationMatrix, cell: int = 44) -> str:
    k = len(cm.names)
    label_w = 8 * max((len(n) for n in cm.names), default=1) + 10
    width = label_w + k * cell + 10
    height = label_w + k * cell + 10
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">'
    ]
    for i, name in enumerate(cm.names):
        y = label_w + i * cell + cell // 2 + 4
        parts.append(f'<text x="{label_w - 6}" y="{y}" text-anchor="end">{name}</text>')
        x = label_w + i * cell + cell // 2 + 4
        parts.append(
            f'<text x="{x}" y="{label_w - 6}" text-anchor="start" transform="rotate(-90 {x} {label_w - 6})">{name}</text>'
        )
    for i in range(k):
        for j in range(k):
            r = float(cm.values[i, j])
            x, y = label_w + j * cell, label_w + i * cell
            ink = "#ffffff" if abs(r) > 0.6 else "#000000"
            parts.append(f'<rect x="{x}" y="{y}" width="{cell}" height="{cell}" fill="{ramp_color(r)}"/>')
            parts.append(
                f'<text x="{x + cell // 2}" y="{y + cell // 2 + 4}" text-anchor="middle" fill="{ink}">{r:.2f}</text>'
            )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_heatmap(cm: CorrelationMatrix, out_dir: str | Path, stem: str = "correlation") -> tuple[Path, Path]:
    """Write ``<stem>.csv`` (6-decimal fixed point) and ``<stem>.svg``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / f"{stem}.csv"
    svg_path = out_dir / f"{stem}.svg"
    write_matrix_csv(cm, csv_path)
    svg_path.write_text(render_svg(cm), encoding="utf-8")
    return csv_path, svg_path


def write_selection(sel: SelectionResult, path: str | Path) -> None:
    Path(path).write_text(json.dumps(sel.to_dict(), indent=2) + "\n", encoding="utf-8")
