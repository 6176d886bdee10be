import os

import pytest

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    """Register an acceptance outcome, then fail the calling test if it did not pass."""
    ACCEPTANCE[number] = (title, bool(ok), detail)
    assert ok, f"acceptance {number} ({title}): {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        tr.write_line(f"{number:>2}. {'PASS' if ok else 'FAIL'}  {title}: {detail}")


@pytest.fixture
def no_color(monkeypatch):
    monkeypatch.setenv("NO_COLOR", "1")
    return os.environ["NO_COLOR"]
