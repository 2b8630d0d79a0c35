"""Case-study graphs with potentials and, where available, exact eigen data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .exceptions import BadParameters
from .graph import MetricGraph, build_graph
from .potential import Constant, Cosine, PotentialField
from .spectral import Eigenpair

CASES = ("circle-free", "flower", "lasso-truncated", "sine-circle", "square-well-star",
         "mathieu-circle", "tetrahedron")


@dataclass
class CaseStudy:
    name: str
    graph: MetricGraph
    potential: PotentialField
    params: dict
    shift: float = 0.0
    reference: dict = field(default_factory=dict)


def _pair(graph, V, E, samples, index=0):
    """Eigenpair from exact samples, normalized by the trapezoid rule."""
    tot = 0.0
    for s, u, _ in samples.values():
        tot += float(np.sum(0.5 * (u[1:] ** 2 + u[:-1] ** 2) * np.diff(s)))
    c = 1.0 / math.sqrt(tot)
    samples = {k: (s, c * u, c * du) for k, (s, u, du) in samples.items()}
    return Eigenpair(float(E), float(E), index, graph, V, samples, 0.0, float("nan"), extrapolation=("exact",))


def circle_free(length=2 * math.pi):
    g = build_graph(["o"], [("c", "o", "o", float(length))])
    ref = {"eigenvalues": sorted([0.0] + [(2 * math.pi * n / length) ** 2 for n in range(1, 8)] * 2)}
    return CaseStudy("circle-free", g, PotentialField({}), {"length": length}, reference=ref)


def flower(k=2.0, mu=(1.0, 1000.0), connector=None, n_samples=2049):
    """Chain of circles of length ``2 pi/k`` joined at nodal points.

    ``mu[j] sin(k x)`` on circle ``j`` and ``0`` on the connectors is an
    eigenfunction with ``E = k^2`` for any amplitudes.
    """
    k = float(k)
    half = math.pi / k
    conn = half if connector is None else float(connector)
    verts, edges = [], []
    n = len(mu)
    for j in range(n):
        verts += [f"p{j}", f"q{j}"]
        edges.append((f"up{j}", f"p{j}", f"q{j}", half))
        edges.append((f"lo{j}", f"q{j}", f"p{j}", half))
        if j + 1 < n:
            edges.append((f"k{j}", f"q{j}", f"p{j + 1}", conn))
    g = build_graph(verts, edges)
    V = PotentialField({})
    samples = {}
    for e in g.edges:
        s = np.linspace(0.0, e.length, n_samples)
        if e.id.startswith("k"):
            samples[e.id] = (s, np.zeros_like(s), np.zeros_like(s))
            continue
        j = int(e.id[2:])
        sgn = 1.0 if e.id.startswith("up") else -1.0
        samples[e.id] = (s, sgn * mu[j] * np.sin(k * s), sgn * mu[j] * k * np.cos(k * s))
    case = CaseStudy("flower", g, V, {"k": k, "mu": tuple(mu), "connector": conn})
    case.reference["eigenpair"] = _pair(g, V, k * k, samples)
    case.reference["eigenvalue"] = k * k
    return case


def lasso_truncated(a=0.1, E=1.0, circle=0.2, truncation=100.0, n_samples=4097):
    """Circle with ``V = E`` on a stalk of length ``a`` (``V = 0``) and a long barrier edge."""
    rE = math.sqrt(E)
    target = rE * math.tan(rE * a)
    if not 0 < rE * a < math.pi / 2:
        raise BadParameters("need 0 < sqrt(E) a < pi/2")
    kappa = brentq(lambda x: x * math.tanh(x * truncation) - target, 1e-14, target + 10.0 / truncation + 1.0,
                   xtol=1e-15, rtol=1e-15)
    g = build_graph(["c", "p", "end"], [("loop", "c", "c", circle), ("stalk", "c", "p", a),
                                          ("far", "p", "end", truncation)])
    V = PotentialField({"loop": Constant(E), "stalk": Constant(0.0), "far": Constant(E + kappa ** 2)})
    samples = {}
    s = np.linspace(0.0, circle, n_samples)
    samples["loop"] = (s, np.ones_like(s), np.zeros_like(s))
    s = np.linspace(0.0, a, n_samples)
    samples["stalk"] = (s, np.cos(rE * s), -rE * np.sin(rE * s))
    s = np.linspace(0.0, truncation, 8 * n_samples)
    amp = math.cos(rE * a) / math.cosh(kappa * truncation)
    samples["far"] = (s, amp * np.cosh(kappa * (truncation - s)), -amp * kappa * np.sinh(kappa * (truncation - s)))
    case = CaseStudy("lasso-truncated", g, V, {"a": a, "E": E, "circle": circle, "truncation": truncation},
                     reference={"eigenvalue": E, "kappa": kappa})
    case.reference["eigenpair"] = _pair(g, V, E, samples)
    return case


def sine_circle():
    """``V = sin 2x`` on a circle of length ``pi``, lifted by 1 so that ``V >= 0``.

    The vertex sits at ``x = -pi/4``; edge coordinate ``s = x + pi/4``. Energies
    in the original variables are obtained by subtracting ``shift``.
    """
    g = build_graph(["o"], [("c", "o", "o", math.pi)])
    V = PotentialField({"c": Cosine(1.0, -1.0, 2.0, 0.0)})
    ref = {"barrier": (math.pi / 4, 3 * math.pi / 4), "ell": math.pi / 4, "prefactor_max": math.sqrt(math.pi) / 2,
           "prefactor_argmax": math.pi / 2}
    return CaseStudy("sine-circle", g, V, {}, shift=1.0, reference=ref)


def square_well_root(n, M, *, truncation=None):
    """Lowest root of ``tan(sqrt E) = (1/n) sqrt(M/E - 1)`` in ``(0, pi^2/4)``."""
    def f(E):
        rhs = math.sqrt(M / E - 1.0)
        if truncation is not None:
            rhs *= math.tanh(math.sqrt(M - E) * truncation)
        return math.tan(math.sqrt(E)) - rhs / n

    hi = min(M, math.pi ** 2 / 4) * (1 - 1e-15)
    return brentq(f, 1e-14, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def square_well_star(n=1, M=25.0, truncation=10.0, n_samples=4097):
    """``n`` parallel inner edges of length 2 (``V = 0``) between two truncated barriers."""
    n = int(n)
    if n < 1 or M <= 0:
        raise BadParameters("need n >= 1 and M > 0")
    edges = [(f"in{j}", "a", "b", 2.0) for j in range(n)]
    edges += [("left", "L", "a", float(truncation)), ("right", "b", "R", float(truncation))]
    g = build_graph(["L", "a", "b", "R"], edges)
    V = PotentialField({"left": Constant(M), "right": Constant(M), **{f"in{j}": Constant(0.0) for j in range(n)}})
    E = square_well_root(n, M, truncation=truncation)
    rE, kap = math.sqrt(E), math.sqrt(M - E)
    samples = {}
    for j in range(n):
        s = np.linspace(0.0, 2.0, n_samples)
        samples[f"in{j}"] = (s, np.cos(rE * (s - 1.0)), -rE * np.sin(rE * (s - 1.0)))
    s = np.linspace(0.0, truncation, 4 * n_samples)
    amp = math.cos(rE) / math.cosh(kap * truncation)
    # left edge runs L -> a, so the distance from the junction is truncation - s
    samples["left"] = (s, amp * np.cosh(kap * s), amp * kap * np.sinh(kap * s))
    samples["right"] = (s, amp * np.cosh(kap * (truncation - s)), -amp * kap * np.sinh(kap * (truncation - s)))
    ref = {"secular_root": square_well_root(n, M), "truncated_root": E, "eigenvalue": E}
    case = CaseStudy("square-well-star", g, V, {"n": n, "M": M, "truncation": truncation}, reference=ref)
    case.reference["eigenpair"] = _pair(g, V, E, samples)
    return case


def mathieu_circle(q=10.0):
    g = build_graph(["o"], [("c", "o", "o", 2 * math.pi)])
    V = PotentialField({"c": Cosine(2 * q, 2 * q, 2.0, 0.0)})
    ref = {"eigenvalues": (6.0630, 6.0634), "uniform_bound_c2_one": 1.87124}
    return CaseStudy("mathieu-circle", g, V, {"q": q}, reference=ref)


def _even_mathieu(q, E):
    def rhs(x, y):
        return [y[1], (2 * q * (1 + math.cos(2 * x)) - E) * y[0]]

    return solve_ivp(rhs, (0.0, math.pi), [1.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-14,
                     dense_output=True)


def tetrahedron(q=10.0, E=72.0, n_samples=8193):
    """Regular tetrahedron, edges ``2 pi``.

    The three edges at the apex carry a constant potential ``C`` chosen so
    that ``cosh`` there matches the even Mathieu solution on the base
    triangle at energy ``E``; the result is an exact symmetric eigenfunction.
    """
    L = 2 * math.pi
    sol = _even_mathieu(q, E)
    m_pi, dm_pi = sol.sol(math.pi)
    ratio = -2.0 * dm_pi / m_pi
    if ratio <= 0:
        raise BadParameters(f"E = {E} admits no cosh matching (m'/m = {dm_pi / m_pi:.4g})")
    kappa = brentq(lambda k: k * math.tanh(L * k) - ratio, 1e-12, ratio + 1.0, xtol=1e-15, rtol=1e-15)
    C = E + kappa ** 2
    verts = ["top", "b1", "b2", "b3"]
    edges = [("t1", "top", "b1", L), ("t2", "top", "b2", L), ("t3", "top", "b3", L),
             ("o12", "b1", "b2", L), ("o23", "b2", "b3", L), ("o31", "b3", "b1", L)]
    g = build_graph(verts, edges)
    V = PotentialField({"t1": Constant(C), "t2": Constant(C), "t3": Constant(C),
                        **{e: Cosine(2 * q, 2 * q, 2.0, 0.0) for e in ("o12", "o23", "o31")}})
    t = m_pi / math.cosh(kappa * L)
    samples = {}
    s = np.linspace(0.0, L, n_samples)
    for e in ("t1", "t2", "t3"):
        samples[e] = (s, t * np.cosh(kappa * s), t * kappa * np.sinh(kappa * s))
    x = np.abs(s - math.pi)
    mv, dmv = sol.sol(x)
    for e in ("o12", "o23", "o31"):
        samples[e] = (s, mv, np.sign(s - math.pi) * dmv)
    ref = {"eigenvalue": E, "kappa": kappa, "C": C, "m_pi": m_pi, "dm_pi": dm_pi}
    case = CaseStudy("tetrahedron", g, V, {"q": q, "E": E}, reference=ref)
    case.reference["eigenpair"] = _pair(g, V, E, samples)
    return case


_BUILDERS = {
    "circle-free": circle_free,
    "flower": flower,
    "lasso-truncated": lasso_truncated,
    "sine-circle": sine_circle,
    "square-well-star": square_well_star,
    "mathieu-circle": mathieu_circle,
    "tetrahedron": tetrahedron,
}


def build_case_study(name, **params) -> CaseStudy:
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise BadParameters(f"unknown case study {name!r}; choose from {', '.join(CASES)}") from None
    try:
        return builder(**params)
    except TypeError as exc:
        raise BadParameters(str(exc)) from None
