from __future__ import annotations

import numpy as np
import pytest

from tierpredict.correlation import pearson
from tierpredict.dataset import (
    CSV_HEADER,
    Dataset,
    DatasetError,
    StudentRecord,
    default_config,
    generate_synthetic,
    load_csv,
    validate,
    write_csv,
)

HEADER = ",".join(CSV_HEADER)


def _write(tmp_path, text, name="cohort.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


VALID = HEADER + "\n" + "\n".join(
    [
        "S1,M,70,80,65,90,75,82,78,6.5,1,81",
        "S2,F,60,55,70,85,58,61,59,3,4,57.5",
        "S3,M,88,92,80,70,90,95,91,10,0,93",
    ]
) + "\n"


def test_load_valid_rows(tmp_path):
    ds = load_csv(_write(tmp_path, VALID))
    assert len(ds) == 3
    assert ds.provenance == "loaded"
    assert ds.records[1].microcomputer == 57.5
    assert ds.records[2].attendance == 0 and isinstance(ds.records[2].attendance, int)


def test_out_of_range_names_row_and_column(tmp_path):
    text = HEADER + "\nS1,M,70,101,65,90,75,82,78,6.5,1,81\n"
    with pytest.raises(DatasetError, match=r"row 1, column 'mathematics'"):
        load_csv(_write(tmp_path, text))


def test_empty_cell_becomes_missing(tmp_path):
    text = HEADER + "\nS1,M,70,80,,90,75,82,78,6.5,1,81\n"
    ds = load_csv(_write(tmp_path, text))
    assert ds.records[0].english is None


@pytest.mark.parametrize(
    "text, match",
    [
        (HEADER.replace("java", "jawa") + "\n", "jawa"),
        (HEADER + "\nS1,M,70,80,65,90,75,82,78,6.5,1,81\nS1,F,70,80,65,90,75,82,78,6.5,1,81\n", "duplicate student_id 'S1'"),
        (HEADER + "\nS1,M,70,eighty,65,90,75,82,78,6.5,1,81\n", "cannot parse 'eighty'"),
        (HEADER + "\nS1,M,70,80,65,90,75,82,78,6.5,1.5,81\n", "attendance"),
        (HEADER + "\nS1,X,70,80,65,90,75,82,78,6.5,1,81\n", "gender"),
        (HEADER + "\nS1,M,70,80,65,90,75,82,78,-1,1,81\n", "study_time"),
    ],
)
def test_load_errors(tmp_path, text, match):
    with pytest.raises(DatasetError, match=match):
        load_csv(_write(tmp_path, text))


def test_target_column_may_be_absent(tmp_path):
    text = ",".join(CSV_HEADER[:-1]) + "\nS1,M,70,80,65,90,75,82,78,6.5,1\n"
    ds = load_csv(_write(tmp_path, text))
    assert ds.records[0].microcomputer is None
    assert not ds.has_target


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_csv(tmp_path / "nope.csv")


def test_roundtrip_is_identity(tmp_path):
    ds = generate_synthetic(default_config(n=300, seed=5, missing_rate=0.1))
    p = tmp_path / "c.csv"
    write_csv(ds, p)
    back = load_csv(p)
    assert back.records == ds.records
    p2 = tmp_path / "c2.csv"
    write_csv(back, p2)
    assert p.read_bytes() == p2.read_bytes()


def test_validate_reports_without_raising():
    recs = (
        StudentRecord("a", "M", mathematics=50.0, study_time=None),
        StudentRecord("a", "F", mathematics=120.0, study_time=2.0),
    )
    ds = Dataset(recs)
    rep = validate(ds)
    assert rep.missing["study_time"] == 1
    assert rep.duplicate_ids == ["a"]
    assert ("a", "mathematics", 120.0) in rep.range_violations
    assert ds.records == recs


def test_validate_clean(tmp_path):
    rep = validate(load_csv(_write(tmp_path, VALID)))
    assert rep.ok and rep.n_issues == 0


def test_generate_empty():
    assert len(generate_synthetic(default_config(n=0))) == 0


def test_generate_is_deterministic(tmp_path):
    a, b = (generate_synthetic(default_config(n=500, seed=42)) for _ in range(2))
    assert a == b
    write_csv(a, tmp_path / "a.csv")
    write_csv(b, tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert generate_synthetic(default_config(n=500, seed=43)) != a


def test_generated_values_respect_schema():
    ds = generate_synthetic(default_config(n=1000, seed=7, missing_rate=0.2))
    rep = validate(ds)
    assert not rep.range_violations and not rep.duplicate_ids
    assert all(r.microcomputer is not None for r in ds)
    masked = sum(rep.missing.values()) / (1000 * 9)
    assert 0.17 < masked < 0.23


def _pairs(ds, col):
    t = np.array(ds.column("microcomputer"))
    v = ds.column(col)
    keep = [i for i, x in enumerate(v) if x is not None]
    return np.array([v[i] for i in keep], dtype=float), t[keep]


def test_default_cohort_correlation_signs(cohort):
    positives = ("mathematics", "database", "java", "computer_network", "study_time")
    for col in positives:
        assert pearson(*_pairs(cohort, col)) > 0, col
    assert pearson(*_pairs(cohort, "java")) >= 0.6
    assert pearson(*_pairs(cohort, "attendance")) < 0


def test_config_rejects_bad_weights():
    with pytest.raises(ValueError, match="attendance"):
        default_config(target_weights={"java": 1, "computer_network": 1, "mathematics": 1, "study_time": 1, "attendance": 0.5})
    with pytest.raises(ValueError):
        default_config(missing_rate=1.0)
