"""Shared pytest plumbing.

Collects the acceptance verdict lines so they appear in the terminal
summary of every run, including ones with output capture enabled.
"""

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
