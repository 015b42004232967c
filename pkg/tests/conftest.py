import sys
import pathlib

import numpy as np
import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

from oqho import linalg  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=linalg.available_backends())
def backend(request):
    previous = linalg.set_backend(request.param)
    yield request.param
    linalg.set_backend(previous)


_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None or call.when != "call":
        return
    num, title = mark.args
    entry = _CRITERIA.setdefault(num, {"title": title, "failed": [], "count": 0})
    entry["count"] += 1
    if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        e = _CRITERIA[num]
        status = "FAIL" if e["failed"] else "PASS"
        detail = f" (failed: {', '.join(e['failed'])})" if e["failed"] else ""
        terminalreporter.write_line(f"{status} criterion {num}: {e['title']}{detail}")
