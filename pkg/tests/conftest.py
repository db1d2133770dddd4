import json
from pathlib import Path

import pytest

from hetnet.model import load_network

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

ACCEPTANCE_LINES = []


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.json"


def net_of(name: str):
    return load_network(fixture_path(name))


def expected(name: str) -> dict:
    with open(FIXTURES / "expected" / "examples.json") as fh:
        return json.load(fh)[name]


@pytest.fixture(scope="session")
def nets():
    return {p.stem: load_network(p) for p in sorted(FIXTURES.glob("*.json"))}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
