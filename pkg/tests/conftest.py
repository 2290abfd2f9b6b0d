"""Collects per-criterion acceptance outcomes and prints them after the run.

Tests tagged ``@pytest.mark.acceptance(number, title)`` may attach a
measured value with ``record_property("detail", ...)``. A criterion with
several tests passes only if all of them pass.
"""

import pytest

_outcomes: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or (report.when != "call" and not report.failed):
        return
    number, title = marker.args
    entry = _outcomes.setdefault(number, {"title": title, "ok": True, "details": []})
    entry["ok"] &= report.passed
    entry["details"] += [str(v) for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        entry = _outcomes[number]
        status = "PASS" if entry["ok"] else "FAIL"
        detail = "; ".join(entry["details"])
        line = f"AC{number:02d} {status}  {entry['title']}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
