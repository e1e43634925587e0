"""Tier assignment, instruction plans, predicted-vs-actual reports and survey tallies."""

from __future__ import annotations

import csv
import json
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .metrics import ConfusionMatrix, confusion
from .labels import CLASSES


class Tier(str, Enum):
    A = "A"
    B = "B"
    C = "C"

    @property
    def index(self) -> int:
        return CLASSES.index(self.value)

    def __str__(self) -> str:
        return self.value


TIER_HEADINGS = ("Level A (80-100)", "Level B (60-79)", "Level C (<60)")


@dataclass(frozen=True)
class Thresholds:
    a: float = 80.0
    b: float = 60.0

    def __post_init__(self):
        if not 0.0 <= self.b <= self.a <= 100.0:
            raise ValueError("thresholds must satisfy 0 <= b <= a <= 100")


DEFAULT_THRESHOLDS = Thresholds()


def assign_tier(score: float, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> Tier:
    """A for ``score >= 80``, B for ``60 <= score < 80``, C below 60.

    Scores in the open interval (79, 80) fall in B.
    """
    if not 0.0 <= score <= 100.0:
        raise ValueError(f"score {score!r} outside [0, 100]")
    if score >= thresholds.a:
        return Tier.A
    if score >= thresholds.b:
        return Tier.B
    return Tier.C


def to_index(labels: Iterable) -> np.ndarray:
    """Map tier labels (``Tier``, ``"A"`` or class index) to class indices."""
    out = []
    for lab in labels:
        if isinstance(lab, (int, np.integer)):
            if not 0 <= lab < len(CLASSES):
                raise ValueError(f"class index {lab} out of range")
            out.append(int(lab))
        else:
            out.append(CLASSES.index(str(lab)))
    return np.asarray(out, dtype=np.int64)


# -- plans ----------------------------------------------------------------


@dataclass(frozen=True)
class TierPlan:
    level: Tier
    objective: str
    content: str
    assignment: str

    def render(self) -> str:
        return (
            f"Level {self.level.value}\n"
            f"Teaching objective: {self.objective}\n"
            f"Teaching content: {self.content}\n"
            f"Assignment: {self.assignment}\n"
        )


def load_plans(path: str | Path | None = None) -> dict[Tier, TierPlan]:
    if path is None:
        text = resources.files("tierpredict.data").joinpath("plans.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    raw = json.loads(text)
    plans = {}
    for tier in Tier:
        entry = raw[tier.value]
        plan = TierPlan(tier, entry["objective"], entry["content"], entry["assignment"])
        if not (plan.objective and plan.content and plan.assignment):
            raise ValueError(f"plan for level {tier.value} has an empty field")
        plans[tier] = plan
    return plans


def generate_plan(level: Tier | str, plans: Mapping[Tier, TierPlan] | None = None) -> TierPlan:
    plans = plans if plans is not None else load_plans()
    return plans[Tier(str(level))]


# -- cohort comparison ------------------------------------------------------


def percentages(counts: Sequence[int]) -> list[int]:
    """Integer percentages, rounded half-up, with any drift from 100 put on the largest count."""
    total = sum(counts)
    if total <= 0:
        raise ValueError("percentages need a positive total")
    pct = [(200 * c + total) // (2 * total) for c in counts]
    drift = 100 - sum(pct)
    if drift:
        largest = max(range(len(counts)), key=lambda i: (counts[i], -i))
        pct[largest] += drift
    return pct


@dataclass(frozen=True)
class CohortComparison:
    predicted_counts: tuple[int, int, int]
    actual_counts: tuple[int, int, int]
    predicted_pct: tuple[int, int, int]
    actual_pct: tuple[int, int, int]
    matrix: ConfusionMatrix

    @property
    def size(self) -> int:
        return sum(self.actual_counts)

    def table(self) -> str:
        return format_comparison(self)


def compare_cohorts(predicted: Sequence, actual: Sequence) -> CohortComparison:
    if len(predicted) != len(actual):
        raise ValueError(f"length mismatch: {len(predicted)} predicted vs {len(actual)} actual")
    if not len(actual):
        raise ValueError("cohort is empty")
    p, a = to_index(predicted), to_index(actual)
    cm = confusion(a, p, n_classes=len(CLASSES))
    pc = tuple(int(x) for x in cm.counts.sum(axis=1))
    ac = tuple(int(x) for x in cm.counts.sum(axis=0))
    return CohortComparison(pc, ac, tuple(percentages(pc)), tuple(percentages(ac)), cm)


def vectors_from_matrix(counts) -> tuple[list[str], list[str]]:
    """Expand a predicted-by-actual count matrix into aligned label vectors."""
    predicted, actual = [], []
    for i, row in enumerate(np.asarray(counts, dtype=np.int64)):
        for j, c in enumerate(row):
            predicted += [CLASSES[i]] * int(c)
            actual += [CLASSES[j]] * int(c)
    return predicted, actual


def format_comparison(cc: CohortComparison) -> str:
    """Text table with Predicted/Actual rows and ``count(pct%)`` cells."""
    rows = [
        ("Predicted", cc.predicted_counts, cc.predicted_pct),
        ("Actual", cc.actual_counts, cc.actual_pct),
    ]
    cells = [[f"{c}({p}%)" for c, p in zip(counts, pct)] for _, counts, pct in rows]
    label_w = max(len(r[0]) for r in rows)
    widths = [max(len(h), *(len(r[i]) for r in cells)) for i, h in enumerate(TIER_HEADINGS)]
    lines = ["  ".join([" " * label_w] + [h.ljust(w) for h, w in zip(TIER_HEADINGS, widths)]).rstrip()]
    for (name, _, _), row in zip(rows, cells):
        lines.append("  ".join([name.ljust(label_w)] + [c.ljust(w) for c, w in zip(row, widths)]).rstrip())
    return "\n".join(lines) + "\n"


# -- survey -------------------------------------------------------------------

LIKERT_LEVELS = (5, 4, 3, 2, 1)
LIKERT_LABELS = {
    5: "strongly agree",
    4: "agree",
    3: "neutral",
    2: "disagree",
    1: "strongly disagree",
}


@dataclass(frozen=True)
class QuestionSummary:
    question_id: str
    counts: tuple[int, ...]  # ordered by LIKERT_LEVELS (5 down to 1)
    percents: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def zero_count(self) -> bool:
        return self.n == 0


@dataclass(frozen=True)
class SurveySummary:
    questions: tuple[QuestionSummary, ...]

    def __getitem__(self, question_id: str) -> QuestionSummary:
        for q in self.questions:
            if q.question_id == question_id:
                return q
        raise KeyError(question_id)


def aggregate_survey(
    responses: Iterable[tuple[str, int]],
    questions: Sequence[str] | None = None,
) -> SurveySummary:
    """Tally Likert responses per question.

    ``questions`` lists question ids that must appear in the summary even with
    no responses; those come back flagged ``zero_count``.
    """
    tallies: dict[str, list[int]] = defaultdict(lambda: [0] * 5)
    seen = 0
    for qid, level in responses:
        if level not in LIKERT_LABELS:
            raise ValueError(f"likert level {level!r} for question {qid!r} outside 1..5")
        tallies[str(qid)][LIKERT_LEVELS.index(int(level))] += 1
        seen += 1
    if not seen:
        raise ValueError("no survey responses")
    order = list(questions or [])
    order += sorted(q for q in tallies if q not in order)
    out = []
    for qid in order:
        counts = tuple(tallies.get(qid, [0] * 5))
        pct = tuple(percentages(counts)) if sum(counts) else (0,) * 5
        out.append(QuestionSummary(qid, counts, pct))
    return SurveySummary(tuple(out))


def read_survey_csv(path: str | Path) -> list[tuple[str, int]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"respondent_id", "question_id", "likert"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"survey CSV missing columns: {', '.join(sorted(missing))}")
        out = []
        for row_no, row in enumerate(reader, start=1):
            try:
                level = int(row["likert"])
            except ValueError:
                raise ValueError(f"row {row_no}: likert {row['likert']!r} is not an integer") from None
            out.append((row["question_id"], level))
    return out


def write_survey_csv(summary: SurveySummary, path: str | Path) -> None:
    header = ["question_id", "responses", "zero_count"]
    for lvl in LIKERT_LEVELS:
        key = LIKERT_LABELS[lvl].replace(" ", "_")
        header += [f"{key}_count", f"{key}_pct"]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for q in summary.questions:
            row = [q.question_id, q.n, int(q.zero_count)]
            for c, p in zip(q.counts, q.percents):
                row += [c, p]
            w.writerow(row)
