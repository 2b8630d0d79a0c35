import math

import pytest

from qglandscape import build_case_study, build_graph, solve
from qglandscape.potential import Cosine, PotentialField, Quadratic


@pytest.fixture(scope="session")
def mathieu():
    case = build_case_study("mathieu-circle", q=10.0)
    pairs = solve(case.graph, case.potential, 4)
    return case, pairs


@pytest.fixture(scope="session")
def tetra():
    return build_case_study("tetrahedron")


@pytest.fixture(scope="session")
def well():
    return build_case_study("square-well-star", n=1, M=25.0)


@pytest.fixture
def star():
    g = build_graph(["c", "a", "b", "d"], [("e1", "c", "a", 1.0), ("e2", "c", "b", 1.0), ("e3", "c", "d", 1.5)])
    V = PotentialField({e: Quadratic(1.0, 0.0, 4.0) for e in ("e1", "e2", "e3")})
    return g, V


@pytest.fixture
def barrier():
    """Segment with a bump: allowed ends, forbidden middle for E = 5."""
    g = build_graph(["a", "b"], [("e", "a", "b", 4.0)])
    V = PotentialField({"e": Cosine(10.0, -10.0, math.pi / 2)})
    return g, V



ACCEPTANCE = []


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
