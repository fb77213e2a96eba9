"""Shared pytest hooks: collect acceptance verdicts and echo them at the end."""

import pytest

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report():
    """Record one [PASS]/[FAIL] line per acceptance criterion and return it."""

    def _report(number: int, name: str, ok: bool, detail: str = "") -> str:
        verdict = "PASS" if ok else "FAIL"
        line = f"[{verdict}] criterion {number}: {name}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line, flush=True)
        return line

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
