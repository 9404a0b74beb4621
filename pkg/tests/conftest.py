"""Shared pytest hooks.

The acceptance battery records one verdict line per criterion; echo them
after the run so they stay visible whether or not the test passed (stdout
of passing tests is captured and discarded otherwise).
"""

criterion_verdicts: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if criterion_verdicts:
        terminalreporter.section("acceptance criteria")
        for line in criterion_verdicts:
            terminalreporter.write_line(line)
