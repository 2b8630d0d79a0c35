import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qglandscape import build_graph, check_domination, solve
from qglandscape.cases import _pair
from qglandscape.exceptions import ShiftNotBelowE, SubintervalTooShort
from qglandscape.local import (
    GFunction,
    auto_oscillation_subinterval,
    auto_windows,
    davies_envelope,
    gronwall_envelope,
    oscillation_envelope,
    window_envelope,
)
from qglandscape.potential import Constant, PotentialField


@pytest.fixture(scope="module")
def flat_pair():
    g = build_graph(["a", "b", "c"], [("x", "a", "b", 2.0), ("y", "b", "c", 1.0)])
    V = PotentialField({"x": Constant(1.0), "y": Constant(1.0)})
    return solve(g, V, 2)[1]


def test_g_is_constant_where_v_equals_e_m(flat_pair):
    for e in ("x", "y"):
        _, d = GFunction(flat_pair, 1.0).discrete(e)
        assert np.ptp(d) <= 1e-8 * np.max(d)


def test_g_needs_e_m_below_e(flat_pair):
    with pytest.raises(ShiftNotBelowE):
        GFunction(flat_pair, flat_pair.energy + 1)


def test_davies_dominates_on_every_edge(mathieu, tetra):
    _, pairs = mathieu
    built = 0
    for p in pairs + [tetra.reference["eigenpair"]]:
        for e in p.graph.edges:
            if p.potential.on(e.id).extrema(0.0, e.length)[0] >= p.energy:
                with pytest.raises(ShiftNotBelowE):
                    davies_envelope(p, e.id)
                continue
            assert check_domination(p, davies_envelope(p, e.id)).passed
            built += 1
    assert built >= 7


def test_davies_is_exact_for_a_free_wave():
    g = build_graph(["a", "b"], [("e", "a", "b", 3.0)])
    s = np.linspace(0, 3, 3001)
    k = 2.0
    p = _pair(g, PotentialField({}), k * k, {"e": (s, np.cos(k * s), -k * np.sin(k * s))})
    env = davies_envelope(p, "e", E_m=0.0)
    assert np.allclose(env("e", s), env.provenance["g_anchor"] ** 0.5)
    assert env.provenance["g_anchor"] ** 0.5 == pytest.approx(p.sup_norm(), rel=1e-6)


def test_oscillation_dominates_on_tetrahedron(tetra):
    p = tetra.reference["eigenpair"]
    V, g = tetra.potential, tetra.graph
    built = 0
    for e in g.edges:
        try:
            sub = auto_oscillation_subinterval(V, p.energy, g, e.id)
        except SubintervalTooShort:
            continue
        em = V.on(e.id).extrema(0.0, e.length)[0]
        env = oscillation_envelope(V, p.energy, em, g, e.id, sub, eigenpair=p)
        assert check_domination(p, env).passed
        built += 1
    assert built >= 1


def test_oscillation_rejects_short_subinterval(tetra):
    V, g = tetra.potential, tetra.graph
    e = g.edges[0].id
    with pytest.raises(SubintervalTooShort):
        oscillation_envelope(V, 72.0, 0.0, g, e, (0.0, 0.01), psi_sup=1.0)


def test_window_bound_dominates(mathieu):
    case, pairs = mathieu
    p = pairs[0]
    wins = auto_windows(case.graph, case.potential, p.energy)
    assert wins
    for w in wins:
        assert check_domination(p, window_envelope(case.graph, case.potential, p.energy, w, eigenpair=p)).passed
        assert check_domination(p, window_envelope(case.graph, case.potential, p.energy, w)).passed


def _sine_edge(L=4.0):
    g = build_graph(["a", "b"], [("e", "a", "b", L)])
    V = PotentialField({})
    s = np.linspace(0, L, 4001)
    return g, V, s


def test_gronwall_plain_form_fails_where_linear_part_vanishes():
    g, V, s = _sine_edge()
    x0 = 2.5
    # psi = sin: the linear part sin x0 + (x - x0) cos x0 vanishes at x0 - tan x0 ~ 3.247
    plain = gronwall_envelope(math.sin(x0), math.cos(x0), V, 1.0, g, "e", x0, variant="plain")
    cert = gronwall_envelope(math.sin(x0), math.cos(x0), V, 1.0, g, "e", x0)
    xz = x0 - math.tan(x0)
    assert plain("e", np.array([xz]))[0] < abs(math.sin(xz))
    assert np.all(cert("e", s) >= np.abs(np.sin(s)) - 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 4.0), st.floats(0.3, 3.0), st.floats(0.0, 6.3))
def test_gronwall_certified_dominates_free_waves(x0, k, phase):
    g, V, s = _sine_edge()
    psi = np.sin(k * s + phase)
    env = gronwall_envelope(math.sin(k * x0 + phase), k * math.cos(k * x0 + phase), V, k * k, g, "e", x0)
    assert np.all(env("e", s) >= np.abs(psi) - 1e-12)
