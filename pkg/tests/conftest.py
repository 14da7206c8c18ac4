from pathlib import Path

import pytest

from mtmkit.eltio import parse, parse_file

GOLDEN = Path(__file__).resolve().parents[1] / "src" / "mtmkit" / "data" / "golden"


def golden(name):
    return parse_file(GOLDEN / f"{name}.elt")


@pytest.fixture
def load():
    return golden


@pytest.fixture
def elt():
    return parse


# Acceptance results, one line per criterion, repeated in the terminal summary.
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
