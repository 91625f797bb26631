"""Shared pytest plumbing: the acceptance-line reporter.

Each acceptance test emits exactly one PASS/FAIL line through the
``acceptance_report`` fixture.  Lines are printed as they happen (visible
with -s or on failure) and repeated in a terminal summary section so the
verdicts are readable in a plain ``pytest -v`` run.
"""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    def report(criterion: str, ok: bool, detail: str = "") -> None:
        line = f"[acceptance] {criterion}: {'PASS' if ok else 'FAIL'}"
        if detail:
            line += f"  ({detail})"
        _ACCEPTANCE_LINES.append(line)
        print(line, flush=True)

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
