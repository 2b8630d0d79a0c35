import math

import numpy as np
import pytest

from qglandscape import CASES, build_case_study, solve
from qglandscape.cases import square_well_root
from qglandscape.exceptions import BadParameters
from qglandscape.verify import eigen_residual

EXACT = [("tetrahedron", {}), ("tetrahedron", {"q": 5.0, "E": 300.0}), ("flower", {}),
         ("lasso-truncated", {}), ("square-well-star", {"n": 3, "M": 100.0})]


@pytest.mark.parametrize("name", CASES)
def test_every_case_builds_a_valid_potential(name):
    case = build_case_study(name)
    case.potential.validate(case.graph)
    assert case.graph.m >= 1


@pytest.mark.parametrize("name, params", EXACT)
def test_exact_eigenpairs_solve_the_equation(name, params):
    p = build_case_study(name, **params).reference["eigenpair"]
    r = eigen_residual(p)
    assert r["ode"] <= 1e-7 and r["continuity"] <= 1e-12 and r["kirchhoff"] <= 1e-12
    assert p.norm_sq() == pytest.approx(1.0, abs=1e-12)


def test_tetrahedron_matching_constants():
    # frozen after the matching equation and residual check above
    a = build_case_study("tetrahedron").reference
    b = build_case_study("tetrahedron", q=5.0, E=300.0).reference
    assert a["kappa"] == pytest.approx(5.27154, abs=1e-5) and a["C"] == pytest.approx(99.78913, abs=1e-5)
    assert b["kappa"] == pytest.approx(2.96358, abs=1e-5) and b["C"] == pytest.approx(308.78283, abs=1e-5)
    assert a["kappa"] * math.tanh(2 * math.pi * a["kappa"]) == pytest.approx(-2 * a["dm_pi"] / a["m_pi"])


def test_positive_reference_pairs_are_ground_states():
    for name, kw, h in [("lasso-truncated", {}, 0.025), ("square-well-star", {"n": 1, "M": 25.0}, 0.02)]:
        case = build_case_study(name, **kw)
        p = case.reference["eigenpair"]
        assert all(np.all(u > 0) for _, u, _ in p.samples.values())
        E0 = solve(case.graph, case.potential, 1, h=h)[0].energy
        assert E0 == pytest.approx(p.energy, rel=1e-8)


def bisect_root(n, M):
    f = lambda E: math.tan(math.sqrt(E)) - math.sqrt(M / E - 1) / n  # noqa: E731
    lo, hi = 1e-12, min(M, math.pi ** 2 / 4) * (1 - 1e-15)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) < 0 else (lo, mid)
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("M", [10.0, 25.0, 100.0])
def test_square_well_root_against_bisection(n, M):
    r = square_well_root(n, M)
    assert 0 < r < math.pi ** 2 / 4
    assert r == pytest.approx(bisect_root(n, M), rel=1e-13)


def test_square_well_root_decreases_with_n():
    roots = [square_well_root(n, 25.0) for n in (1, 2, 3, 4)]
    assert roots == sorted(roots, reverse=True)


def test_flower_amplitudes_are_free():
    p1 = build_case_study("flower", mu=(1.0, 1.0)).reference["eigenpair"]
    p2 = build_case_study("flower", mu=(1.0, 1000.0)).reference["eigenpair"]
    assert p1.energy == p2.energy == 4.0
    assert p2.sup_norm("up1") / p2.sup_norm("up0") == pytest.approx(1000.0)


@pytest.mark.parametrize("name, params", [("nope", {}), ("flower", {"colour": 1}),
                                          ("square-well-star", {"n": 0}), ("lasso-truncated", {"a": 10.0})])
def test_bad_case_parameters(name, params):
    with pytest.raises(BadParameters):
        build_case_study(name, **params)
