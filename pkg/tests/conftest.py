from pathlib import Path

import numpy as np
import pytest

from olsfs import encode_response_multinomial, load_csv

DATA = Path(__file__).parent / "data"
IRIS_CSV = DATA / "iris7.csv"

# criterion number -> (description, list of outcomes)
_CRITERIA = {}


@pytest.fixture
def iris():
    features, labels = load_csv(IRIS_CSV, "species")
    return features, labels, encode_response_multinomial(labels)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            number, text = mark.args
            _CRITERIA.setdefault(number, [text, []])


@pytest.hookimpl(wrapper=True)
def pytest_runtest_makereport(item, call):
    report = yield
    mark = item.get_closest_marker("acceptance")
    if mark is not None and (report.when == "call" or report.failed or report.skipped):
        number = mark.args[0]
        _CRITERIA[number][1].append(report.outcome)
    return report


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        text, outcomes = _CRITERIA[number]
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        elif any(o == "failed" for o in outcomes):
            status = "FAIL"
        else:
            status = "SKIP"
        terminalreporter.write_line(f"{status:<7} criterion {number}: {text}")
