import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from sparse_ising import IsingHamiltonian  # noqa: E402
from sparse_ising.instances import frustrated_triangle_instance  # noqa: E402

coefficient = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)


@st.composite
def hamiltonians(draw, min_nodes=1, max_nodes=6, zero_bias=False):
    n = draw(st.integers(min_nodes, max_nodes))
    nodes = [f"s{i}" for i in range(n)]
    h = {u: (0.0 if zero_bias else draw(coefficient)) for u in nodes}
    J = {}
    for i in range(n):
        for j in range(i + 1, n):
            if draw(st.booleans()):
                J[(nodes[i], nodes[j])] = draw(coefficient)
    return IsingHamiltonian(h, J, nodes=nodes)


@pytest.fixture
def triangle():
    return frustrated_triangle_instance()


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if rep.when == "call" and "test_acceptance.py::test_criterion_" in rep.nodeid:
                name = rep.nodeid.split("::")[-1]
                number = int(name.split("_")[2])
                detail = dict(rep.user_properties).get("detail", "")
                lines.append((number, "PASS" if rep.passed else "FAIL", name, detail))
    if lines:
        terminalreporter.section("acceptance criteria")
        for number, status, name, detail in sorted(lines):
            terminalreporter.write_line(f"criterion {number}: {status}  ({name})")
            if detail:
                terminalreporter.write_line(f"    {detail}")
