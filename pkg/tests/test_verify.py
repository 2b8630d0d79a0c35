import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qglandscape import Envelope, Region, build_graph, check_domination, harnack_constant, select_regime
from qglandscape.exceptions import BadParameters, PathNotFound
from qglandscape.potential import PotentialField
from qglandscape.torsion import build_landscape
from qglandscape.verify import LABELS, boggio_check, strict_local_maxima, super_kirchhoff_sums


def constant_envelope(g, c, region=None):
    return Envelope("uniform", g, region or Region.full(g), lambda e, s: np.full(np.shape(s), c))


def test_domination_report_lists_violations(mathieu):
    case, pairs = mathieu
    p = pairs[0]
    sup = p.sup_norm()
    good = check_domination(p, constant_envelope(case.graph, 1.01 * sup))
    bad = check_domination(p, constant_envelope(case.graph, 0.5 * sup))
    assert good.passed and not good.violations
    assert not bad.passed and bad.violations
    assert bad.worst_margin == pytest.approx(0.5 * sup - sup, rel=1e-3)
    assert "FAIL" in bad.summary() and "pass" in good.summary()
    assert len(good.grid["c"]) == 512


def test_domination_rejects_empty_envelope(mathieu):
    case, pairs = mathieu
    with pytest.raises(BadParameters):
        check_domination(pairs[0], constant_envelope(case.graph, 1.0, Region.empty(case.graph)))


@pytest.fixture(scope="module")
def mathieu_landscape(mathieu):
    case, _ = mathieu
    return build_landscape(case.graph, case.potential)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([0, 1, 2, 3]), st.sampled_from([1.0, -1.0]), st.floats(1.0, 10.0))
def test_comparison_function_has_no_strict_positive_maxima(mathieu, mathieu_landscape, j, sign, factor):
    case, pairs = mathieu
    p = pairs[j]
    c = factor * p.energy * p.sup_norm()
    s = np.linspace(0, 2 * math.pi, 4001)
    w = sign * p.values("c", s) - c * mathieu_landscape("c", s)
    assert strict_local_maxima(case.graph, {"c": (s, w)}) == []


def test_strict_local_maxima_finds_interior_and_vertex_peaks():
    g = build_graph(["c", "a", "b"], [("x", "c", "a", 1.0), ("y", "c", "b", 1.0)])
    s = np.linspace(0, 1, 101)
    found = strict_local_maxima(g, {"x": (s, 1 - s), "y": (s, 1 - s)})
    assert found == [("vertex", "c")]
    bump = np.exp(-((s - 0.5) / 0.1) ** 2)
    found = strict_local_maxima(g, {"x": (s, bump), "y": (s, -s)})
    assert found == [("x", 0.5)]


def _cosine_phi(om):
    # phi = cos(om (s - 1)) on [0, 2]: outgoing derivatives at both ends are om sin(om)
    return (lambda e, s: np.cos(om * (s - 1)), lambda e, s: -om * np.sin(om * (s - 1)),
            lambda e, s: -om * om * np.cos(om * (s - 1)))


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(-2, 2), st.floats(-2, 2))
def test_boggio_holds_for_super_kirchhoff_phi(k, a, b):
    g = build_graph(["a", "b"], [("e", "a", "b", 2.0)])
    # phi = cosh(s - 1) has outgoing sums -sinh(1) at both ends
    phi = lambda e, s: np.cosh(s - 1)  # noqa: E731
    dphi = lambda e, s: np.sinh(s - 1)  # noqa: E731
    out = boggio_check(g, phi, dphi, phi, lambda e, s: a * np.cos(k * s) + b * s,
                       lambda e, s: -a * k * np.sin(k * s) + b)
    assert out["super_kirchhoff"] and out["holds"]


def test_boggio_fails_when_phi_grows_out_of_vertices():
    g = build_graph(["a", "b"], [("e", "a", "b", 2.0)])
    out = boggio_check(g, *_cosine_phi(0.5), lambda e, s: np.ones_like(s), lambda e, s: np.zeros_like(s))
    assert not out["super_kirchhoff"]
    assert out["lhs"] == 0.0 and out["rhs"] == pytest.approx(0.5)
    assert not out["holds"]


def test_super_kirchhoff_sign():
    g = build_graph(["a", "b"], [("e", "a", "b", 2.0)])
    sums = super_kirchhoff_sums(g, lambda e, s: np.sinh(np.asarray(s) - 1))
    assert sums["a"] < 0 and sums["b"] < 0


def test_harnack_point_and_region(mathieu):
    case, pairs = mathieu
    g, V = case.graph, case.potential
    p0 = pairs[0]
    assert harnack_constant(g, V, p0.energy, g.point("c", 1.0))[0] == 1.0
    W = Region(g, {"c": [(1.2, 1.9)]})
    C, info = harnack_constant(g, V, p0.energy, W)
    s = np.linspace(1.2, 1.9, 400)
    v = np.abs(p0.values("c", s))
    assert v.max() / v.min() <= C
    assert info["path_length"] == pytest.approx(0.7)


def test_harnack_pair_must_stay_in_u(mathieu):
    case, pairs = mathieu
    g, V = case.graph, case.potential
    U = Region(g, {"c": [(1.0, 2.0)]})
    with pytest.raises(PathNotFound):
        harnack_constant(g, V, 6.0, (g.point("c", 0.5), g.point("c", 1.5)), U)
    C, _ = harnack_constant(g, V, 6.0, (g.point("c", 1.2), g.point("c", 1.5)), U)
    assert C >= 1


def test_regime_fractions(mathieu):
    case, pairs = mathieu
    rm = select_regime(case.graph, case.potential, pairs[0].energy)
    assert sum(rm.fraction(lab) for lab in LABELS) == pytest.approx(1.0)
    assert rm.fraction("tunneling") > 0.5
    assert rm.fraction("high-energy") == 0.0


def test_high_energy_regime():
    g = build_graph(["a", "b"], [("e", "a", "b", 1.0)])
    rm = select_regime(g, PotentialField({}), 100.0)
    assert rm.fraction("high-energy") == 1.0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.5, 60.0))
def test_regime_labels_are_consistent(E):
    g = build_graph(["o"], [("c", "o", "o", 2 * math.pi)])
    from qglandscape.potential import Cosine
    V = PotentialField({"c": Cosine(20.0, 20.0, 2.0)})
    rm = select_regime(g, V, E)
    s, lab = rm.grid["c"], rm.labels["c"]
    v = V("c", s)
    assert np.all(np.abs(v[lab == "transition"] - E) < rm.tau)
    assert np.all(v[lab == "tunneling"] > E)
    assert np.all(v[lab == "allowed-moderate"] <= E)
    regs = rm.regions(g)
    assert sum(r.measure for r in regs.values()) == pytest.approx(2 * math.pi)
