from __future__ import annotations

from pathlib import Path

import pytest

from timed_opacity.modelio import load

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "timed_opacity" / "fixtures"

# criterion number -> (passed, seconds, description); filled by test_acceptance
ACCEPTANCE: dict = {}


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.pta"


@pytest.fixture(scope="session")
def fig1():
    return load(fixture_path("fig1")).pta


@pytest.fixture(scope="session")
def fig3():
    return load(fixture_path("fig3")).pta


@pytest.fixture(scope="session")
def two_branch():
    return load(fixture_path("two_branch")).pta


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, secs, desc = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'} ({secs:.2f} s) {desc}")
