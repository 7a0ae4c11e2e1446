"""Shared pytest plumbing: collects acceptance-criterion results and prints
one pass/fail line per criterion at the end of the session."""

ACCEPTANCE_LINES = {}


def record_criterion(number: int, line: str) -> None:
    ACCEPTANCE_LINES[number] = line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
