"""Shared pytest hooks for the acceptance gate.

The acceptance tests record one verdict line per criterion; printing them
from a terminal-summary hook keeps them visible regardless of capture mode.
"""

criterion_verdicts = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if criterion_verdicts:
        terminalreporter.section("acceptance criteria")
        for line in criterion_verdicts:
            terminalreporter.write_line(line)
