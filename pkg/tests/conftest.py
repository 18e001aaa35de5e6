"""Shared test plumbing: the acceptance verdict lines.

Acceptance tests call record_criterion() before asserting, so the
terminal summary carries one PASS/FAIL line per criterion even when the
backing assertion trips.
"""

_CRITERIA = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    _CRITERIA.append((name, bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _CRITERIA:
        verdict = "PASS" if passed else "FAIL"
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"[{verdict}] {name}{suffix}")
