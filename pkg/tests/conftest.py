import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    n, title = marker.args
    outcome = "PASS" if call.excinfo is None else "FAIL"
    prev = _criteria.get(n, ("PASS", title))[0]
    _criteria[n] = ("FAIL" if "FAIL" in (prev, outcome) else "PASS", title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria, key=int):
        outcome, title = _criteria[n]
        terminalreporter.write_line(f"[{outcome}] {n}. {title}")
