"""Shared test plumbing: acceptance-summary reporting.

Acceptance tests register a one-line verdict per criterion; the lines are
echoed in the terminal summary so they are visible even when pytest captures
stdout of passing tests.
"""

_acceptance_lines = []


def record_criterion(number: int, passed: bool, detail: str):
    line = f"CRITERION {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    _acceptance_lines.append((number, line))
    print(line, flush=True)
    assert passed, line


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_acceptance_lines):
        terminalreporter.write_line(line)
