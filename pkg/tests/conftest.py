from __future__ import annotations

import numpy as np
import pytest

from tierpredict.dataset import default_config, generate_synthetic
from tierpredict.preprocess import FeatureMatrix

_CRITERIA: list[tuple[int, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test decides")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _CRITERIA.append((marker.args[0], marker.args[1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, outcome in sorted(_CRITERIA):
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")


@pytest.fixture(scope="session")
def cohort():
    return generate_synthetic(default_config())


def make_matrix(X, y=None, names=None) -> FeatureMatrix:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    names = tuple(names or (f"f{i}" for i in range(X.shape[1])))
    ids = tuple(f"r{i}" for i in range(len(X)))
    return FeatureMatrix(X, names, ids, None if y is None else np.asarray(y, dtype=np.int64))


@pytest.fixture
def matrix():
    return make_matrix
