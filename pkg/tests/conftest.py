from pathlib import Path

import pytest

from lpro.syntax import parse_discourse

DISCOURSES = Path(__file__).resolve().parent.parent / "discourses"

# filled by test_acceptance, printed at the end of the session
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def load(name: str):
    return parse_discourse((DISCOURSES / name).read_text())


@pytest.fixture
def discourse_dir() -> Path:
    return DISCOURSES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
