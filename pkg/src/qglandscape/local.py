"""Edge-local bounds for allowed and transition regimes.

``g = psi^2 + psi'^2/(E - E_m)`` obeys ``|g'| <= |V - E_m| g / sqrt(E - E_m)``,
which controls ``|psi|`` along an edge from one anchor point. None of these
bounds is propagated through vertices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .agmon import metric_distance_field, metric_superlevel
from .envelope import Envelope
from .exceptions import (
    BadParameters,
    CollarContainsVertex,
    ShiftNotBelowE,
    SubintervalTooShort,
)
from .quadrature import CumulativeIntegral
from .regions import Region, positive_intervals


def _abs_cumulative(V, edge, L, Em, x0=0.0, moment=False):
    """Cumulative integral of ``|V - E_m|`` (times ``t`` if ``moment``) from ``x0``."""
    d = V.on(edge)
    f = lambda s: np.asarray(d(s), float) - Em
    roots = [x for iv in positive_intervals(f, L, n_scan=2048, breakpoints=d.breakpoints(L)) for x in iv]
    roots += [x for iv in positive_intervals(lambda s: -f(s), L, n_scan=2048) for x in iv]
    bp = np.concatenate([d.breakpoints(L), roots, [x0]])
    integrand = (lambda s: np.abs(f(s)) * s) if moment else (lambda s: np.abs(f(s)))
    ci = CumulativeIntegral(integrand, L, bp, cells=128, order=16)
    base = float(ci(np.array([x0]))[0])
    return lambda s: ci(s) - base


@dataclass
class GFunction:
    eigenpair: object
    E_m: float

    def __post_init__(self):
        if not self.E_m < self.eigenpair.energy:
            raise ShiftNotBelowE(f"E_m = {self.E_m} must be below E = {self.eigenpair.energy}")

    @property
    def energy(self):
        return self.eigenpair.energy

    def __call__(self, edge, s):
        p = self.eigenpair
        return p.values(edge, s) ** 2 + p.derivatives(edge, s) ** 2 / (self.energy - self.E_m)

    def discrete(self, edge):
        """Half-node values ``u_i u_{i+1} + (D+u)^2/(E_h - E_m)`` with the discrete energy.

        For ``V = E_m`` on the edge these are exactly constant.
        """
        s, u, _ = self.eigenpair.samples[edge]
        h = s[1] - s[0]
        lam = self.eigenpair.discrete_energy - self.E_m
        return 0.5 * (s[1:] + s[:-1]), u[:-1] * u[1:] + ((u[1:] - u[:-1]) / h) ** 2 / lam


def davies_envelope(eigenpair, edge, anchor=None, E_m=None, *, n_anchor=4096):
    """``|psi(x)| <= sqrt(g(y)) exp(|int_y^x |V - E_m|| / (2 sqrt(E - E_m)))`` on one edge."""
    g = eigenpair.graph
    V = eigenpair.potential
    L = g.length(edge)
    E = eigenpair.energy
    if E_m is None:
        E_m = V.on(edge).extrema(0.0, L)[0]
    gf = GFunction(eigenpair, float(E_m))
    if anchor is None:
        s = np.linspace(0.0, L, n_anchor + 1)
        anchor = float(s[int(np.argmin(gf(edge, s)))])
    gy = float(gf(edge, np.array([anchor]))[0])
    cum = _abs_cumulative(V, edge, L, E_m, x0=anchor)
    k = 0.5 / math.sqrt(E - E_m)

    def func(e, s):
        return math.sqrt(gy) * np.exp(k * np.abs(cum(s)))

    prov = {"E": E, "E_m": E_m, "anchor": anchor, "g_anchor": gy, "edge": edge,
            "vertex_propagating": False, "g_envelope": "g(x) <= g(y) exp(2 k |int|)"}
    return Envelope("davies", g, Region(g, {edge: [(0.0, L)]}), func, prov)


def oscillation_envelope(V, E, E_m, graph, edge, sub, interval=None, *, psi_sup=None, eigenpair=None):
    """Derivative-free variant anchored on an oscillation interval ``sub = (x1, x2)``."""
    if not E_m < E:
        raise ShiftNotBelowE(f"E_m = {E_m} must be below E = {E}")
    L = graph.length(edge)
    x1, x2 = map(float, sub)
    a, b = interval if interval is not None else (0.0, L)
    if not (a <= x1 < x2 <= b):
        raise BadParameters("subinterval must lie inside the interval")
    k2 = E - V.on(edge).extrema(x1, x2)[1]
    if k2 <= 0:
        raise SubintervalTooShort(f"E - V is not positive on ({x1:g}, {x2:g})")
    k = math.sqrt(k2)
    if x2 - x1 < math.pi / k * (1 - 1e-12):
        raise SubintervalTooShort(f"length {x2 - x1:g} < pi/k = {math.pi / k:g}")
    if psi_sup is None:
        if eigenpair is None:
            raise BadParameters("need psi_sup or an eigenpair")
        s = np.linspace(x1, x2, 4097)
        psi_sup = float(np.max(np.abs(eigenpair.values(edge, s))))
    c1 = _abs_cumulative(V, edge, L, E_m, x0=x1)
    c2 = _abs_cumulative(V, edge, L, E_m, x0=x2)
    kk = 0.5 / math.sqrt(E - E_m)

    def func(e, s):
        s = np.asarray(s, float)
        right = np.where(s >= x1, np.exp(kk * np.maximum(c1(s), 0.0)), np.inf)
        left = np.where(s <= x2, np.exp(kk * np.maximum(-c2(s), 0.0)), np.inf)
        return psi_sup * np.minimum(right, left)

    prov = {"E": E, "E_m": E_m, "k": k, "sub": (x1, x2), "psi_sup_sub": psi_sup, "edge": edge,
            "vertex_propagating": False}
    return Envelope("oscillation", graph, Region(graph, {edge: [(a, b)]}), func, prov)


def auto_oscillation_subinterval(V, E, graph, edge, *, n=4097):
    """Longest stretch where ``E - V`` stays above the level making it long enough."""
    L = graph.length(edge)
    s = np.linspace(0.0, L, n)
    v = np.asarray(V(edge, s), float)
    best = None
    for level in np.linspace(0.95, 0.05, 19) * (E - v.min()):
        ok = (E - v) >= level
        i = 0
        while i < n:
            if ok[i]:
                j = i
                while j + 1 < n and ok[j + 1]:
                    j += 1
                x1, x2 = s[i], s[j]
                k2 = E - V.on(edge).extrema(x1, x2)[1]
                if k2 > 0 and x2 - x1 >= math.pi / math.sqrt(k2):
                    if best is None or x2 - x1 < best[1] - best[0]:
                        best = (x1, x2)
                i = j + 1
            else:
                i += 1
        if best is not None:
            return best
    raise SubintervalTooShort(f"no oscillation interval on edge {edge} at E = {E:g}")


# --------------------------------------------------------------------------

def window_envelope(g, V, E, window: Region, ell=None, eigenpair=None):
    """``|psi|^2 <= (ell^-2 int_B psi^2 + int_W (E - V)_+ psi^2) dist(x, bd W)``."""
    bd = window.boundary()
    for b in bd:
        if b.point.vertex is not None:
            raise CollarContainsVertex("window boundary passes through a vertex")
    if not bd:
        raise BadParameters("window has no boundary")
    dist = metric_distance_field(g, [b.point for b in bd])
    if ell is None:
        ell = min(g.min_edge_length / 2, 0.25 * min(b - a for _, iv in window.items() for a, b in iv))
    inner = window.intersect(metric_superlevel(dist, ell))
    band = window.intersect(inner.complement())
    for v in g.vertices:
        p = g.vertex_point(v)
        if band.contains(p.edge, np.array([p.s]))[0] and not inner.contains(p.edge, np.array([p.s]))[0]:
            d = dist.at(p)
            if 0 < d < ell:
                raise CollarContainsVertex(f"vertex {v} lies in the window collar")
    maxk = 0.0
    for eid, ivs in window.items():
        for a, b in ivs:
            maxk = max(maxk, E - V.on(eid).extrema(a, b)[0])
    maxk = max(maxk, 0.0)
    free = 1.0 / ell ** 2 + maxk
    K = free
    norm = kin = None
    if eigenpair is not None:
        norm = eigenpair.norm_sq(band)
        kin = sum(eigenpair.integral(eid, a, b, weight=lambda s, eid=eid: np.maximum(E - V(eid, s), 0.0))
                  for eid, ivs in window.items() for a, b in ivs)
        K = norm / ell ** 2 + kin

    def func(e, s):
        return np.sqrt(K * dist.along(e, s))

    prov = {"E": E, "ell": ell, "collar_norm_sq": norm, "kinetic": kin, "K": K, "K_psi_free": free,
            "max_E_minus_V": maxk}
    return Envelope("window", g, inner, func, prov)


def auto_windows(g, V, E, tau=None):
    """Components of ``{|V - E| <= tau}`` that avoid vertices on their boundary."""
    tau = 0.05 * max(1.0, E) if tau is None else tau
    ivs = {}
    for e in g.edges:
        d = V.on(e.id)
        ivs[e.id] = positive_intervals(lambda s, d=d: tau - np.abs(np.asarray(d(s), float) - E), e.length,
                                       n_scan=2048, ztol=-1e-15)
    comps = Region(g, ivs).components()
    return [c for c in comps if c.boundary() and all(b.point.vertex is None for b in c.boundary())]


def gronwall_envelope(psi0, dpsi0, V, E, graph, edge, x0, segment=None, *, variant="certified"):
    """Shooting bound from data at ``x0`` along a vertex-free segment.

    The certified variant uses ``max(|psi0|, |psi0 + (x - x0) psi0'|)`` as the
    amplitude so that Gronwall's lemma applies with a monotone forcing term.
    """
    L = graph.length(edge)
    a, b = segment if segment is not None else (0.0, L)
    if not (0.0 <= a <= x0 <= b <= L):
        raise BadParameters("x0 must lie in the segment")
    c0 = _abs_cumulative(V, edge, L, E, x0=x0)
    c1 = _abs_cumulative(V, edge, L, E, x0=x0, moment=True)

    def func(e, s):
        s = np.asarray(s, float)
        with np.errstate(over="ignore"):
            growth = np.exp(np.maximum(s * c0(s) - c1(s), 0.0))
        lin = np.abs(psi0 + (s - x0) * dpsi0)
        amp = lin if variant == "plain" else np.maximum(abs(psi0), lin)
        return amp * growth

    if variant not in ("plain", "certified"):
        raise BadParameters(f"unknown variant {variant!r}")
    prov = {"E": E, "x0": x0, "psi0": psi0, "dpsi0": dpsi0, "edge": edge, "variant": variant,
            "vertex_propagating": False}
    return Envelope("gronwall", graph, Region(graph, {edge: [(a, b)]}), func, prov)
