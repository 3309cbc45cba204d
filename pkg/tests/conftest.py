"""Shared pytest plumbing.

The acceptance tests register one summary line each; the terminal-summary hook
prints them after the test run so every criterion shows a pass/fail line with
its measured numbers regardless of output capture.
"""

_ACCEPTANCE_LINES = {}


def record_criterion(number, ok, detail):
    _ACCEPTANCE_LINES[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE_LINES):
        ok, detail = _ACCEPTANCE_LINES[number]
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {number:02d} {status}  {detail}")
