import re

import pytest

_ACCEPTANCE: dict[str, dict] = {}


def _criterion_label(class_name: str) -> str:
    match = re.match(r"TestCriterion(\d+)(\w*)", class_name)
    if not match:
        return class_name
    number, rest = match.groups()
    words = re.findall(r"[A-Z][a-z0-9]*", rest)
    return f"criterion {number}: {' '.join(w.lower() for w in words)}"


def pytest_runtest_logreport(report):
    if report.when != "call" or "acceptance" not in getattr(report, "keywords", {}):
        return
    parts = report.nodeid.split("::")
    if len(parts) < 3:
        return
    entry = _ACCEPTANCE.setdefault(parts[1], {"passed": 0, "failed": 0})
    entry["passed" if report.outcome == "passed" else "failed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for class_name, counts in _ACCEPTANCE.items():
        total = counts["passed"] + counts["failed"]
        status = "PASS" if counts["failed"] == 0 else "FAIL"
        terminalreporter.write_line(
            f"{status}  {_criterion_label(class_name)} "
            f"({counts['passed']}/{total} checks)"
        )


@pytest.fixture
def tmp_out(tmp_path):
    out = tmp_path / "out"
    out.mkdir()
    return out
