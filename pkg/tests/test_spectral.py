import math

import numpy as np
import pytest
from scipy.special import mathieu_a, mathieu_b

from qglandscape import build_case_study, build_graph, solve
from qglandscape.exceptions import BadParameters, StepTooCoarse
from qglandscape.potential import Constant, PotentialField
from qglandscape.spectral import assemble, richardson
from qglandscape.verify import eigen_residual


def mathieu_reference(q, k):
    # -psi'' + 2q(1 + cos 2s) psi on the 2 pi circle: E = a_m(q) + 2q, b_m(q) + 2q
    vals = [mathieu_a(m, q) for m in range(k)] + [mathieu_b(m, q) for m in range(1, k)]
    return np.sort(np.array(vals) + 2 * q)[:k]


def test_mathieu_matches_characteristic_values(mathieu):
    _, pairs = mathieu
    assert np.allclose([p.energy for p in pairs], mathieu_reference(10.0, 4), rtol=0, atol=1e-5)


def test_free_circle_spectrum():
    g = build_case_study("circle-free").graph
    E = [p.energy for p in solve(g, PotentialField({}), 5)]
    assert np.allclose(E, [0, 1, 1, 4, 4], atol=1e-7)


def test_star_of_equal_edges_has_dirichlet_multiplicity():
    # three edges of length 1 from a centre, free ends: Neumann star
    g = build_graph(["c", "a", "b", "d"], [("x", "c", "a", 1.0), ("y", "c", "b", 1.0), ("z", "c", "d", 1.0)])
    E = [p.energy for p in solve(g, PotentialField({}), 4)]
    # k = pi/2 with multiplicity 2 (vanishing at the centre), then k = pi
    assert E[0] == pytest.approx(0.0, abs=1e-9)
    assert E[1] == pytest.approx(math.pi ** 2 / 4, rel=1e-8)
    assert E[2] == pytest.approx(math.pi ** 2 / 4, rel=1e-8)
    assert E[3] == pytest.approx(math.pi ** 2, rel=1e-8)


def test_eigenfunctions_are_normalized_and_kirchhoff(mathieu):
    _, pairs = mathieu
    for p in pairs:
        assert p.norm_sq() == pytest.approx(1.0, abs=1e-10)
        assert max(abs(v) for v in p.kirchhoff_sums().values()) < 1e-8
        vals = p.vertex_values()["o"]
        assert max(vals) - min(vals) < 1e-12


def test_eigenfunctions_orthogonal(mathieu):
    _, pairs = mathieu
    s, _, _ = pairs[0].samples["c"]
    U = np.array([p.samples["c"][1] for p in pairs])
    G = np.trapezoid(U[:, None, :] * U[None, :, :], s, axis=-1)
    assert np.allclose(G, np.eye(len(pairs)), atol=1e-8)


def test_residual_of_solved_pair_is_small(mathieu):
    _, pairs = mathieu
    r = eigen_residual(pairs[0])
    assert r["continuity"] < 1e-12 and r["kirchhoff"] < 1e-6
    assert r["ode"] < 1e-2  # P1 second differences on the finest grid


def test_residual_detects_a_wrong_energy(well):
    p = well.reference["eigenpair"]
    assert eigen_residual(p)["ode"] < 1e-8
    p2 = type(p)(p.energy + 0.01, p.energy, 0, p.graph, p.potential, p.samples, 0.0, float("nan"))
    assert eigen_residual(p2)["ode"] > 1e-3


def test_richardson_removes_h2_and_h4():
    h = np.array([0.1, 0.05, 0.025])
    seq = 2.0 + 3 * h ** 2 - 5 * h ** 4
    assert richardson(seq) == pytest.approx(2.0, abs=1e-13)


def test_step_too_coarse():
    g = build_graph(["a", "b"], [("e", "a", "b", 0.1)])
    with pytest.raises(StepTooCoarse):
        assemble(g, PotentialField({}), 0.05)


def test_bad_k():
    g = build_graph(["a", "b"], [("e", "a", "b", 1.0)])
    with pytest.raises(BadParameters):
        solve(g, PotentialField({}), 0)


def test_constant_shift_moves_spectrum():
    g = build_graph(["a", "b"], [("e", "a", "b", 2.0)])
    E0 = [p.energy for p in solve(g, PotentialField({}), 3)]
    E1 = [p.energy for p in solve(g, PotentialField({"e": Constant(3.5)}), 3)]
    assert np.allclose(np.array(E1) - E0, 3.5, atol=1e-9)
