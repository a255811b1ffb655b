"""Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    key = (int(match.group(1)), match.group(2).replace("_", " "))
    if report.when == "call" or report.failed:
        ok = report.passed and _CRITERIA.get(key, True)
        _CRITERIA[key] = ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), ok in sorted(_CRITERIA.items()):
        terminalreporter.write_line(f"criterion {number:2d} {name}: {'PASS' if ok else 'FAIL'}")
