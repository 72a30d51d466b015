from __future__ import annotations

from pathlib import Path

import pytest

from morse_extension.diagram import GermDiagram, parse_germ

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"

# criterion number -> (passed, description); filled in by test_acceptance
ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def load_fixture(name: str) -> GermDiagram:
    return parse_germ((FIXTURES / f"{name}.germ").read_text(encoding="utf-8"))


@pytest.fixture
def sphere() -> GermDiagram:
    return load_fixture("sphere")


@pytest.fixture
def path4() -> GermDiagram:
    return load_fixture("path4")


@pytest.fixture
def cycle4() -> GermDiagram:
    return load_fixture("cycle4")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_RESULTS):
        passed, text = ACCEPTANCE_RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {text}")
