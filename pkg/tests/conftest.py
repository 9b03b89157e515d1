"""Shared test plumbing.

The acceptance tests register one line per criterion; printing happens in
the terminal summary hook so the lines survive pytest's output capture.
"""

from __future__ import annotations

_ACCEPTANCE_LINES: list = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in _ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
