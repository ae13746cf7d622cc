from __future__ import annotations

import pytest

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def record_criterion():
    """Store the outcome of acceptance criterion ``cid`` for the terminal summary."""

    def record(cid: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[cid] = (bool(passed), detail)
        print(f"ACCEPTANCE C{cid} {'PASS' if passed else 'FAIL'} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"ACCEPTANCE C{cid} {'PASS' if passed else 'FAIL'} {detail}")
