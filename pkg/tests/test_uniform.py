import collections
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qglandscape import build_case_study, build_graph, check_domination
from qglandscape.exceptions import BadParameters, EnergyBelowInf
from qglandscape.uniform import (
    circle_p_hat,
    free_spectrum_equilateral,
    heat_majorant,
    oldbve_sum,
    p_hat_edge,
    sinc_constant,
    theta3_sum,
    uniform_bound,
    uniform_envelope,
)


def p_hat_poisson(t, L, N=60):
    # Poisson-summed form of (1/L) theta_3(0, exp(-(pi/L)^2 t))
    n = np.arange(-N, N + 1)
    return float(np.sum(np.exp(-(n * L) ** 2 / t)) / math.sqrt(math.pi * t))


def test_sinc_constant():
    M, x = sinc_constant()
    assert M == pytest.approx(2.29456, abs=1e-5)
    grid = np.linspace(math.pi, 40, 400001)
    assert M == pytest.approx(np.max(2 / (1 - np.sin(grid) / grid)), rel=1e-9)
    assert 2 * math.pi < x < 3 * math.pi


@pytest.mark.parametrize("t", [0.01, 0.1, 1.0, 10.0])
@pytest.mark.parametrize("L", [0.5, 2.0, 2 * math.pi])
def test_p_hat_edge_matches_poisson_form(t, L):
    val, tail = p_hat_edge(t, L)
    assert tail >= 0
    assert val == pytest.approx(p_hat_poisson(t, L), rel=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.999), st.floats(0.0, 0.999))
def test_theta_sum_monotone_in_nome(a, b):
    lo, hi = sorted((a, b))
    s_lo, t_lo = theta3_sum(lo)
    s_hi, _ = theta3_sum(hi)
    assert s_lo <= s_hi + t_lo
    assert s_lo >= 0


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 20.0), st.floats(0.5, 10.0))
def test_p_hat_edge_decreases_in_time(t, L):
    assert p_hat_edge(t, L)[0] >= p_hat_edge(1.5 * t, L)[0] - 1e-15


def test_theta_rejects_bad_nome():
    with pytest.raises(BadParameters):
        theta3_sum(1.0)


def test_tetrahedron_free_spectrum_multiplicities():
    g = build_case_study("tetrahedron").graph
    counts = collections.Counter(round(math.sqrt(m.eigenvalue), 8) for m in free_spectrum_equilateral(g, 2.2))
    a = round(math.acos(-1 / 3) / (2 * math.pi), 8)
    assert counts[a] == 3 and counts[round(1 - a, 8)] == 3
    assert counts[1.0] == 4 and counts[2.0] == 4
    assert counts[0.5] == 2


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_circle_heat_trace_closed_form(t):
    g = build_graph(["o"], [("c", "o", "o", 2 * math.pi)])
    hm = heat_majorant(g, t)
    pe = hm["per_edge"]["c"]
    assert pe["p_gamma"] + pe["p_gamma_tail"] == pytest.approx(circle_p_hat(t), rel=1e-10)
    assert hm["hkub_ok"] and hm["hkub2_ok"]


@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_tetrahedron_heat_majorant(t):
    g = build_case_study("tetrahedron").graph
    hm = heat_majorant(g, t)
    assert hm["hkub_ok"] and hm["hkub2_ok"]
    assert hm["hkub2_lhs"] <= hm["hkub2_rhs"]


def test_variants_order_and_energy_check(mathieu):
    case, pairs = mathieu
    g, V = case.graph, case.potential
    E, vmin = pairs[0].energy, V.minimum(g)
    cert = uniform_bound(g, E, vmin)
    opt = uniform_bound(g, E, vmin, variant="optimized")
    lit = uniform_bound(g, E, vmin, variant="literal")
    assert opt <= cert
    assert lit < pairs[0].sup_norm() <= opt
    assert math.sqrt(oldbve_sum(g, 6.063, 0.0, C2=1.0)) == pytest.approx(1.87124, abs=5e-6)
    with pytest.raises(EnergyBelowInf):
        uniform_bound(g, -1.0, vmin)
    with pytest.raises(BadParameters):
        uniform_bound(g, E, vmin, variant="nope")


def test_uniform_envelope_dominates_all_solved_pairs(mathieu):
    case, pairs = mathieu
    for p in pairs:
        env = uniform_envelope(case.graph, p.energy, case.potential.minimum(case.graph))
        assert check_domination(p, env).passed


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 100.0), st.floats(0.0, 100.0))
def test_bound_monotone_in_energy(a, b):
    g = build_graph(["o"], [("c", "o", "o", 1.0)])
    lo, hi = sorted((a, b))
    assert uniform_bound(g, lo, 0.0) <= uniform_bound(g, hi, 0.0) + 1e-12
