import json
import sys
from pathlib import Path

import pytest

from lattice_pd import io
from lattice_pd.lattice import BoundedLatticeMap

FIXTURES = Path(__file__).parent / "fixtures"


def fixture(name: str) -> Path:
    return FIXTURES / name


def load(name: str):
    return json.loads(fixture(name).read_text())


@pytest.fixture
def fig3():
    """``(F, G, alpha)`` over the diamond and the three-chain."""
    F = io.read_filtration(fixture("fig3_F.json"))
    G = io.read_filtration(fixture("fig3_G.json"))
    alpha = BoundedLatticeMap(F.index, G.index, {"a": "p", "b": "p", "c": "r", "d": "r"})
    return F, G, alpha


@pytest.fixture
def fig6():
    return io.read_filtration(fixture("fig6_F.json"))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
