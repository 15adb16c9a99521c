import numpy as np
import pytest

from splitrx.core import ChannelModel

NAKAGAMI = ChannelModel.nakagami(1.12, 0.05, 0.59)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def nakagami():
    return NAKAGAMI


# --- one summary line per acceptance criterion ------------------------------

_CRITERIA: dict[int, tuple[str, bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and report.passed:
        return
    number, title = mark.args
    ok = report.passed and _CRITERIA.get(number, (title, True))[1]
    _CRITERIA[number] = (title, ok)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} [PRIMARY] {'PASS' if ok else 'FAIL'}  {title}")
