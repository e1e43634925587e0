"""Student-record schema, CSV ingestion and the seeded synthetic cohort generator."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections import Counter
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

SCORE_COLUMNS = (
    "language",
    "mathematics",
    "english",
    "pe",
    "database",
    "java",
    "computer_network",
)
TARGET = "microcomputer"
FEATURE_COLUMNS = ("gender",) + SCORE_COLUMNS + ("study_time", "attendance")
CSV_HEADER = ("student_id",) + FEATURE_COLUMNS[:1] + SCORE_COLUMNS + ("study_time", "attendance", TARGET)
GENDERS = ("M", "F")


class DatasetError(ValueError):
    """Raised when a cohort file or record violates the schema."""


@dataclass(frozen=True)
class StudentRecord:
    student_id: str
    gender: str
    language: float | None = None
    mathematics: float | None = None
    english: float | None = None
    pe: float | None = None
    database: float | None = None
    java: float | None = None
    computer_network: float | None = None
    study_time: float | None = None
    attendance: int | None = None
    microcomputer: float | None = None

    def get(self, column: str):
        return getattr(self, column)


@dataclass(frozen=True)
class Dataset:
    records: tuple[StudentRecord, ...]
    provenance: str = "loaded"
    seed: int | None = None
    config_digest: str | None = None

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(r.student_id for r in self.records)

    @property
    def has_target(self) -> bool:
        return all(r.microcomputer is not None for r in self.records)

    def column(self, name: str) -> list:
        return [r.get(name) for r in self.records]

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return replace(self, records=tuple(self.records[i] for i in indices))


@dataclass
class ValidationReport:
    missing: dict[str, int] = field(default_factory=dict)
    range_violations: list[tuple[str, str, Any]] = field(default_factory=list)
    duplicate_ids: list[str] = field(default_factory=list)

    @property
    def n_issues(self) -> int:
        return sum(self.missing.values()) + len(self.range_violations) + len(self.duplicate_ids)

    @property
    def ok(self) -> bool:
        return self.n_issues == 0


def _check_value(column: str, value) -> str | None:
    """Return a reason string when ``value`` breaks the column's invariant."""
    if value is None:
        return None
    if column in SCORE_COLUMNS or column == TARGET:
        if not 0.0 <= value <= 100.0:
            return "score outside [0, 100]"
    elif column == "study_time":
        if value < 0:
            return "study_time must be >= 0"
    elif column == "attendance":
        if value < 0 or value != int(value):
            return "attendance must be a non-negative integer"
    elif column == "gender":
        if value not in GENDERS:
            return "gender must be M or F"
    return None


def validate(ds: Dataset) -> ValidationReport:
    """Collect missing cells, range violations and duplicate ids without raising."""
    report = ValidationReport()
    for col in FEATURE_COLUMNS:
        n_missing = sum(1 for r in ds.records if r.get(col) is None)
        if n_missing:
            report.missing[col] = n_missing
    for r in ds.records:
        for col in FEATURE_COLUMNS + (TARGET,):
            if _check_value(col, r.get(col)):
                report.range_violations.append((r.student_id, col, r.get(col)))
    counts = Counter(ds.ids)
    report.duplicate_ids = sorted(i for i, c in counts.items() if c > 1)
    return report


# -- CSV ----------------------------------------------------------------------


def _parse_cell(column: str, cell: str, row_no: int):
    if cell == "":
        return None
    if column == "gender":
        return cell
    try:
        value = float(cell)
    except ValueError:
        raise DatasetError(f"row {row_no}, column {column!r}: cannot parse {cell!r} as a number") from None
    if not math.isfinite(value):
        raise DatasetError(f"row {row_no}, column {column!r}: non-finite value {cell!r}")
    if column == "attendance":
        if value != int(value):
            raise DatasetError(f"row {row_no}, column 'attendance': {cell!r} is not an integer")
        return int(value)
    return value


def load_csv(path: str | Path) -> Dataset:
    """Read a cohort CSV. Empty cells become ``None``; the target column is optional."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = tuple(next(reader))
        except StopIteration:
            raise DatasetError(f"{path}: empty file, expected a header row") from None
        expected = CSV_HEADER if len(header) == len(CSV_HEADER) else CSV_HEADER[:-1]
        for i, want in enumerate(expected):
            got = header[i] if i < len(header) else None
            if got != want:
                raise DatasetError(f"header mismatch at position {i + 1}: expected {want!r}, got {got!r}")
        if len(header) != len(expected):
            raise DatasetError(f"header mismatch: unexpected column {header[len(expected)]!r}")

        records = []
        seen: set[str] = set()
        for row_no, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(f"row {row_no}: expected {len(header)} cells, got {len(row)}")
            sid = row[0]
            if not sid:
                raise DatasetError(f"row {row_no}: empty student_id")
            if sid in seen:
                raise DatasetError(f"row {row_no}: duplicate student_id {sid!r}")
            seen.add(sid)
            values = {}
            for col, cell in zip(header[1:], row[1:]):
                value = _parse_cell(col, cell, row_no)
                reason = _check_value(col, value)
                if reason:
                    raise DatasetError(f"row {row_no}, column {col!r}: {reason} (got {cell!r})")
                values[col] = value
            if values.get("gender") is None:
                raise DatasetError(f"row {row_no}, column 'gender': missing")
            records.append(StudentRecord(student_id=sid, **values))
    return Dataset(records=tuple(records), provenance="loaded")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def write_csv(ds: Dataset, path: str | Path, include_target: bool | None = None) -> None:
    """Write ``ds`` in the canonical schema. The target column is dropped when no record has one."""
    if include_target is None:
        include_target = any(r.microcomputer is not None for r in ds.records)
    header = CSV_HEADER if include_target else CSV_HEADER[:-1]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in ds.records:
            writer.writerow([_fmt(r.get(c)) for c in header])


# -- synthetic cohorts --------------------------------------------------------

_LATENT_COLUMNS = SCORE_COLUMNS + ("study_time",)


@dataclass(frozen=True)
class ColumnModel:
    intercept: float
    ability: float
    conscientiousness: float
    noise_sd: float


@dataclass(frozen=True)
class GeneratorConfig:
    """Two-factor latent model for a synthetic cohort.

    Course scores and study time are ``intercept + ability*a + conscientiousness*c
    + noise``, with ``a, c ~ N(0, 1)``. Lateness counts are Poisson with rate
    ``base_rate * exp(-slope * c)``. The target is a linear blend of the observed
    java/network/mathematics/study-time/lateness columns (centred on their
    intercepts) minus a fixed penalty when every ``gate`` column is below its
    threshold, plus Gaussian noise.
    """

    n: int
    seed: int
    columns: Mapping[str, ColumnModel]
    attendance_base_rate: float
    attendance_slope: float
    target_intercept: float
    target_weights: Mapping[str, float]
    target_noise_sd: float
    gate_columns: tuple[str, ...] = ()
    gate_threshold: float = 0.0
    gate_penalty: float = 0.0
    missing_rate: float = 0.0
    female_fraction: float = 0.5

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if not 0.0 <= self.missing_rate < 1.0:
            raise ValueError("missing_rate must lie in [0, 1)")
        if self.target_noise_sd < 0 or any(m.noise_sd < 0 for m in self.columns.values()):
            raise ValueError("noise standard deviations must be >= 0")
        if set(self.columns) != set(_LATENT_COLUMNS):
            raise ValueError(f"columns must cover exactly {_LATENT_COLUMNS}")
        for col in ("java", "computer_network", "mathematics", "study_time"):
            if self.target_weights.get(col, 0.0) <= 0:
                raise ValueError(f"target weight for {col} must be positive")
        if self.target_weights.get("attendance", 0.0) >= 0:
            raise ValueError("target weight for attendance must be negative")
        if self.attendance_base_rate < 0:
            raise ValueError("attendance base rate must be >= 0")

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "GeneratorConfig":
        target = d["target"]
        gate = target.get("gate", {})
        return cls(
            n=int(d["n"]),
            seed=int(d["seed"]),
            columns={k: ColumnModel(**v) for k, v in d["columns"].items()},
            attendance_base_rate=float(d["attendance"]["base_rate"]),
            attendance_slope=float(d["attendance"]["conscientiousness_slope"]),
            target_intercept=float(target["intercept"]),
            target_weights=dict(target["weights"]),
            target_noise_sd=float(target["noise_sd"]),
            gate_columns=tuple(gate.get("columns", ())),
            gate_threshold=float(gate.get("threshold", 0.0)),
            gate_penalty=float(gate.get("penalty", 0.0)),
            missing_rate=float(d.get("missing_rate", 0.0)),
            female_fraction=float(d.get("female_fraction", 0.5)),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "seed": self.seed,
            "missing_rate": self.missing_rate,
            "female_fraction": self.female_fraction,
            "columns": {
                k: {f.name: getattr(m, f.name) for f in fields(ColumnModel)}
                for k, m in sorted(self.columns.items())
            },
            "attendance": {
                "base_rate": self.attendance_base_rate,
                "conscientiousness_slope": self.attendance_slope,
            },
            "target": {
                "intercept": self.target_intercept,
                "weights": dict(sorted(self.target_weights.items())),
                "gate": {
                    "columns": list(self.gate_columns),
                    "threshold": self.gate_threshold,
                    "penalty": self.gate_penalty,
                },
                "noise_sd": self.target_noise_sd,
            },
        }

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def default_config(**overrides) -> GeneratorConfig:
    """Load the checked-in calibrated configuration, optionally overriding fields."""
    text = resources.files("tierpredict.data").joinpath("default_generator.json").read_text()
    cfg = GeneratorConfig.from_dict(json.loads(text))
    return replace(cfg, **overrides) if overrides else cfg


def load_config(path: str | Path, **overrides) -> GeneratorConfig:
    cfg = GeneratorConfig.from_dict(json.loads(Path(path).read_text()))
    return replace(cfg, **overrides) if overrides else cfg


def generate_synthetic(config: GeneratorConfig | None = None) -> Dataset:
    """Draw a cohort from the latent-factor model. Pure in ``(seed, config)``."""
    cfg = config if config is not None else default_config()
    n = cfg.n
    rng = np.random.default_rng(cfg.seed)
    ability = rng.standard_normal(n)
    consc = rng.standard_normal(n)
    female = rng.random(n) < cfg.female_fraction

    cols: dict[str, np.ndarray] = {}
    for name in _LATENT_COLUMNS:
        m = cfg.columns[name]
        raw = m.intercept + m.ability * ability + m.conscientiousness * consc + m.noise_sd * rng.standard_normal(n)
        if name == "study_time":
            cols[name] = np.round(np.maximum(raw, 0.0), 1)
        else:
            cols[name] = np.round(np.clip(raw, 0.0, 100.0), 1)
    rate = cfg.attendance_base_rate * np.exp(-cfg.attendance_slope * consc)
    cols["attendance"] = rng.poisson(rate).astype(np.int64)

    target = np.full(n, cfg.target_intercept)
    for name, w in sorted(cfg.target_weights.items()):
        centre = cfg.attendance_base_rate if name == "attendance" else cfg.columns[name].intercept
        target += w * (cols[name] - centre)
    if cfg.gate_columns:
        gated = np.all([cols[c] < cfg.gate_threshold for c in cfg.gate_columns], axis=0)
        target -= cfg.gate_penalty * gated
    target += cfg.target_noise_sd * rng.standard_normal(n)
    target = np.round(np.clip(target, 0.0, 100.0), 1)

    maskable = _LATENT_COLUMNS + ("attendance",)
    mask = rng.random((n, len(maskable))) < cfg.missing_rate

    width = max(4, len(str(n)))
    records = []
    for i in range(n):
        values: dict[str, Any] = {}
        for j, name in enumerate(maskable):
            v = cols[name][i]
            values[name] = None if mask[i, j] else (int(v) if name == "attendance" else float(v))
        records.append(
            StudentRecord(
                student_id=f"S{i + 1:0{width}d}",
                gender="F" if female[i] else "M",
                microcomputer=float(target[i]),
                **values,
            )
        )
    return Dataset(records=tuple(records), provenance="synthetic", seed=cfg.seed, config_digest=cfg.digest())


def records_from_rows(rows: Sequence[Mapping[str, Any]]) -> Dataset:
    """Build a Dataset from plain dicts (handy in tests and notebooks)."""
    return Dataset(records=tuple(StudentRecord(**row) for row in rows))
