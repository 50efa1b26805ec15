"""Shared test fixtures and the acceptance-criteria summary section."""

import pytest

# (index, name, passed, detail) tuples appended by the acceptance tests
_ACCEPTANCE_RESULTS = []


@pytest.fixture
def acceptance_log():
    """Record one pass/fail line for an acceptance criterion.

    The line is registered before the test's own assert fires, so the
    terminal summary shows every criterion's outcome even on failure.
    """

    def log(index: int, name: str, ok: bool, detail: str) -> bool:
        _ACCEPTANCE_RESULTS.append((index, name, bool(ok), detail))
        return bool(ok)

    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for index, name, ok, detail in sorted(_ACCEPTANCE_RESULTS):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"[{index:2d}] {status}  {name} -- {detail}")
