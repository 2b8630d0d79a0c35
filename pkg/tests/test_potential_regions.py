import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qglandscape import Region, build_graph, classify_regions
from qglandscape.exceptions import BadParameters, NegativePotential
from qglandscape.potential import Constant, Cosine, PotentialField, Quadratic, Sampled, parse_descriptor

finite = st.floats(-5, 5, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 5), finite, st.floats(0.1, 6), st.floats(0, 6.3), st.floats(0, 3), st.floats(0.01, 3))
def test_cosine_extrema_match_a_fine_grid(a, b, om, phi, x0, w):
    d = Cosine(a, b, om, phi)
    lo, hi = d.extrema(x0, x0 + w)
    v = d(np.linspace(x0, x0 + w, 20001))
    assert lo <= v.min() + 1e-12 and hi >= v.max() - 1e-12
    assert lo == pytest.approx(v.min(), abs=1e-6 * (1 + abs(b)))
    assert hi == pytest.approx(v.max(), abs=1e-6 * (1 + abs(b)))


@settings(max_examples=60, deadline=None)
@given(finite, finite, finite, st.floats(-2, 2), st.floats(0.01, 3))
def test_quadratic_extrema_match_a_fine_grid(c0, c1, c2, x0, w):
    d = Quadratic(c0, c1, c2)
    lo, hi = d.extrema(x0, x0 + w)
    v = d(np.linspace(x0, x0 + w, 20001))
    assert lo == pytest.approx(v.min(), abs=1e-6 * (1 + abs(c2)))
    assert hi == pytest.approx(v.max(), abs=1e-6 * (1 + abs(c2)))


def test_sampled_is_piecewise_linear():
    d = Sampled((0.0, 2.0, 1.0), 2.0)
    assert d(0.5) == pytest.approx(1.0)
    assert d.extrema(0.0, 2.0) == (0.0, 2.0)
    assert list(d.breakpoints(2.0)) == [1.0]
    assert d.derivative(np.array([0.5, 1.5])).tolist() == [2.0, -1.0]


@pytest.mark.parametrize("tokens, cls", [(["constant", "2"], Constant), (["cosine", "1", "1", "2"], Cosine),
                                         (["quadratic", "1"], Quadratic), (["sampled", "0", "1"], Sampled)])
def test_parse_descriptor_round_trip(tokens, cls):
    d = parse_descriptor(tokens, 1.0)
    assert isinstance(d, cls)
    assert parse_descriptor(d.tokens(), 1.0) == d


@pytest.mark.parametrize("tokens", [[], ["wave", "1"], ["cosine", "1"], ["quadratic"], ["sampled", "1"]])
def test_parse_descriptor_rejects(tokens):
    with pytest.raises(BadParameters):
        parse_descriptor(tokens, 1.0)


def test_negative_potential_rejected():
    g = build_graph(["a", "b"], [("e", "a", "b", 1.0)])
    with pytest.raises(NegativePotential):
        PotentialField({"e": Cosine(0.0, 1.0, 4.0)}).validate(g)
    PotentialField({"e": Cosine(1.0, 1.0, 1.0)}).validate(g)


def test_missing_edges_carry_zero():
    V = PotentialField({})
    assert V("any", 0.3) == 0.0


def test_partition_of_a_bump(barrier):
    g, V = barrier
    part = classify_regions(g, V, 5.0)
    # V = 10 - 10 cos(pi s / 2) on [0, 4]; V > 5 on (2/3, 10/3)
    (a, b), = part.tunneling.intervals("e")
    assert a == pytest.approx(2 / 3, abs=1e-10)
    assert b == pytest.approx(10 / 3, abs=1e-10)
    assert part.allowed.measure == pytest.approx(4 - (b - a))
    assert len(part.boundary) == 2


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 19.9))
def test_partition_covers_graph_disjointly(E):
    g = build_graph(["a", "b"], [("e", "a", "b", 4.0), ("f", "b", "a", 2.0)])
    V = PotentialField({"e": Cosine(10.0, -10.0, math.pi / 2), "f": Constant(7.0)})
    part = classify_regions(g, V, E)
    assert part.tunneling.intersect(part.allowed).measure == pytest.approx(0.0, abs=1e-12)
    assert part.tunneling.union(part.allowed).measure == pytest.approx(g.total_length)
    for eid, ivs in part.tunneling.items():
        for a, b in ivs:
            s = np.linspace(a, b, 101)[1:-1]
            assert np.all(V(eid, s) > E - 1e-9)


def test_region_algebra():
    g = build_graph(["a", "b"], [("e", "a", "b", 4.0), ("f", "b", "a", 2.0)])
    R = Region(g, {"e": [(0.0, 1.0), (0.5, 2.0)], "f": [(1.0, 2.0)]})
    assert list(R.intervals("e")) == [(0.0, 2.0)]
    assert R.measure == pytest.approx(3.0)
    assert R.complement().measure == pytest.approx(3.0)
    assert R.contains("f", 1.5) and not R.contains("e", 3.0)
    assert R.intersect(R.complement()).is_empty
    assert Region.full(g).measure == pytest.approx(6.0)
    # e[0,2] and f[1,2] meet at vertex a (e start, f end)
    assert len(R.components()) == 1
