"""Shared pytest plumbing.

Acceptance tests register their one-line criterion verdicts here; the
terminal-summary hook echoes them after the run so the lines are visible
even for passing tests, whose captured stdout pytest otherwise hides.
"""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
