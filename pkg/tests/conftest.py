"""Shared pytest hooks: per-criterion pass/fail summary for acceptance tests."""

from collections import defaultdict

import pytest

_OUTCOMES: dict[int, list[str]] = defaultdict(list)
_TITLES: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number = marker.args[0]
    _TITLES[number] = marker.args[1] if len(marker.args) > 1 else ""
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES[number].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        results = _OUTCOMES[number]
        if all(r == "passed" for r in results):
            verdict = "PASS"
        elif any(r == "failed" for r in results):
            verdict = "FAIL"
        else:
            verdict = "SKIP"
        terminalreporter.write_line(
            f"criterion {number:2d}: {verdict}  {_TITLES[number]} ({len(results)} test(s))"
        )
