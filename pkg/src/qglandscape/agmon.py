"""Agmon distances and tunneling-region envelopes."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .envelope import Envelope
from .exceptions import (
    BadParameters,
    CollarContainsVertex,
    CollarOverlap,
    NoSeparatingInterval,
    RegionNotTunneling,
)
from .graph import DistanceField, MetricGraph
from .quadrature import CumulativeIntegral
from .regions import Region, classify_regions, positive_intervals


class SqrtDensityWeight:
    """Path weight with density ``sqrt(q_+)`` for a per-edge function ``q``.

    ``q(edge, s)`` is vectorized in ``s``. ``constant(edge)`` may return the
    value of ``q`` when it is constant on the edge, enabling a closed form.
    """

    def __init__(self, graph: MetricGraph, q, *, breakpoints=None, constant=None, n_scan=1024,
                 cells=64, order=16):
        self.graph = graph
        self.q = q
        self._cum = {}
        self._const = {}
        for e in graph.edges:
            c = constant(e.id) if constant is not None else None
            if c is not None:
                self._const[e.id] = math.sqrt(max(c, 0.0))
                continue
            f = lambda s, eid=e.id: q(eid, s)
            extra = np.asarray(breakpoints(e.id) if breakpoints else (), float)
            roots = [x for iv in positive_intervals(f, e.length, n_scan=n_scan, breakpoints=extra)
                     for x in iv]
            self._cum[e.id] = CumulativeIntegral(
                lambda s, f=f: np.sqrt(np.maximum(f(s), 0.0)), e.length,
                np.concatenate([extra, roots]), cells=cells, order=order, cosine_map=True,
                skip=lambda s, f=f: f(np.array([s]))[0] <= 0.0)

    def cumulative(self, edge, s):
        s = np.asarray(s, dtype=float)
        if edge in self._const:
            return self._const[edge] * np.clip(s, 0.0, self.graph.length(edge))
        return self._cum[edge](s)

    def __call__(self, edge, a, b):
        if b < a:
            a, b = b, a
        if edge in self._const:
            return self._const[edge] * (b - a)
        c = self._cum[edge](np.array([a, b]))
        return float(c[1] - c[0])

    def total(self, edge):
        return self(edge, 0.0, self.graph.length(edge))

    def max_density(self, edge, a, b, n=257):
        if edge in self._const:
            return self._const[edge]
        s = np.linspace(a, b, n)
        return float(np.sqrt(np.maximum(self.q(edge, s), 0.0)).max())


class AgmonWeight(SqrtDensityWeight):
    """Density ``sqrt((V - E)_+)``."""

    def __init__(self, graph, V, E, **kw):
        self.energy = float(E)
        self.potential = V

        def const(eid):
            d = V.on(eid)
            return float(d(0.0)) - self.energy if d.is_constant else None

        super().__init__(graph, lambda eid, s: np.asarray(V(eid, s), float) - self.energy,
                         breakpoints=lambda eid: V.on(eid).breakpoints(graph.length(eid)),
                         constant=const, **kw)


def agmon_distance(g, V, E, S, x, weight=None):
    """Agmon distance from the point set ``S`` to ``x`` at energy ``E``."""
    w = weight or AgmonWeight(g, V, E)
    return DistanceField(g, w, list(S)).at(x)


def metric_distance_field(g, sources):
    return DistanceField(g, _MetricWeight(g), list(sources))


class _MetricWeight:
    def __init__(self, g):
        self.graph = g

    def __call__(self, edge, a, b):
        return abs(b - a)

    def cumulative(self, edge, s):
        return np.asarray(s, dtype=float)


def metric_superlevel(field: DistanceField, ell):
    """Exact region ``{x : dist(x, sources) >= ell}``."""
    g = field.graph
    out = {}
    for e in g.edges:
        du, dv, srcs = field.endpoint_values(e.id)
        lo, hi = ell - du, e.length - ell + dv
        ivs = [(max(lo, 0.0), min(hi, e.length))] if hi >= lo else []
        for s0 in srcs:
            nxt = []
            for a, b in ivs:
                if s0 - ell > a:
                    nxt.append((a, min(b, s0 - ell)))
                if s0 + ell < b:
                    nxt.append((max(a, s0 + ell), b))
            ivs = [(a, b) for a, b in nxt if b >= a]
        out[e.id] = ivs
    return Region(g, out)


# --------------------------------------------------------------------------
# collars

@dataclass(frozen=True)
class Collar:
    edge: str
    start: float  # at the region boundary, where eta = 1
    direction: int
    width: float

    @property
    def interval(self):
        end = self.start + self.direction * self.width
        return (min(self.start, end), max(self.start, end))

    def eta(self, s):
        return np.clip(1.0 - np.abs(np.asarray(s) - self.start) / self.width, 0.0, 1.0)


def _room(region: Region, edge, start, direction):
    """Free length from ``start`` along ``direction`` before the region or a vertex.

    Returns ``(length, stop)`` where ``stop`` is ``"vertex"`` or ``"region"``.
    """
    L = region.graph.length(edge)
    best, stop = (L - start, "vertex") if direction > 0 else (start, "vertex")
    for a, b in region.intervals(edge):
        if direction > 0 and a > start + 1e-14 and a - start < best:
            best, stop = a - start, "region"
        if direction < 0 and b < start - 1e-14 and start - b < best:
            best, stop = start - b, "region"
    return best, stop


def boundary_collars(region: Region, boundary, ell=None):
    """Collars of width ``ell`` leaving ``region`` at each boundary point.

    Collars may start or end at a vertex; a vertex strictly inside a collar is
    rejected, as are collars that overlap each other or re-enter the region.
    """
    g = region.graph
    specs = []
    for bp in boundary:
        for eid, direction in bp.outward:
            p = bp.point
            if p.vertex is not None:
                start = 0.0 if direction > 0 else g.length(eid)
            else:
                start = p.s
            room, stop = _room(region, eid, start, direction)
            specs.append((eid, start, direction, room, stop))
    if not specs:
        raise RegionNotTunneling("region has no boundary")
    if ell is None:
        ell = min([g.min_edge_length / 2] + [r / 2 for *_, r, _ in specs])
    ell = float(ell)
    if not ell > 0:
        raise BadParameters("collar width must be positive")
    collars = []
    for eid, start, direction, room, stop in specs:
        if ell > room * (1 + 1e-12):
            err = CollarContainsVertex if stop == "vertex" else CollarOverlap
            raise err(f"collar of width {ell:g} at {eid}:{start:g} has only {room:g} of room ({stop})")
        collars.append(Collar(eid, start, direction, ell))
    by_edge = {}
    for c in collars:
        by_edge.setdefault(c.edge, []).append(c.interval)
    for eid, ivs in by_edge.items():
        ivs.sort()
        for (a0, b0), (a1, b1) in zip(ivs, ivs[1:]):
            if a1 < b0 - 1e-12:
                raise CollarOverlap(f"collars overlap on edge {eid}")
    return collars, ell


def collar_energy(collars, V, E, eigenpair=None):
    """Returns ``(K, norm_sq, kinetic)`` with ``K`` bounding the localized energy.

    With an eigenpair ``K = norm_sq / ell^2 + int (E - V)_+ eta^2 psi^2`` over the
    collars; without one the normalization ``||psi|| <= 1`` is used.
    """
    ell = collars[0].width
    if eigenpair is None:
        worst = 0.0
        for c in collars:
            a, b = c.interval
            worst = max(worst, E - V.on(c.edge).extrema(a, b)[0])
        return 1.0 / ell ** 2 + max(worst, 0.0), 1.0, max(worst, 0.0)
    norm = kin = 0.0
    for c in collars:
        a, b = c.interval
        norm += eigenpair.integral(c.edge, a, b)
        kin += eigenpair.integral(
            c.edge, a, b, weight=lambda s, c=c: np.maximum(E - V(c.edge, s), 0.0) * c.eta(s) ** 2)
    return norm / ell ** 2 + kin, norm, kin


# --------------------------------------------------------------------------

def interval_envelope(g, V, E, edge, a, b, ell, eigenpair=None, collar_norm=None, *,
                      variant="certified", weight=None):
    """Two-sided barrier bound on ``[a, b]`` inside one edge."""
    L = g.length(edge)
    if not (0 <= a < b <= L):
        raise BadParameters("need 0 <= a < b <= |e|")
    tol = 1e-10 * max(1.0, abs(E))
    if V.on(edge).extrema(a, b)[0] < E - tol:
        raise RegionNotTunneling(f"V < E somewhere on [{a:g}, {b:g}]")
    if a - ell < -1e-12 * L or b + ell > L * (1 + 1e-12):
        raise CollarContainsVertex(f"[a - ell, b + ell] leaves edge {edge}")
    w = weight or AgmonWeight(g, V, E)
    ca = w.cumulative(edge, np.array([a]))[0]
    cb = w.cumulative(edge, np.array([b]))[0]
    collars = [Collar(edge, a, -1, ell), Collar(edge, b, 1, ell)]
    if eigenpair is not None:
        K, norm, kin = collar_energy(collars, V, E, eigenpair)
    else:
        K, norm, kin = collar_energy(collars, V, E)
        if collar_norm is not None:
            K = collar_norm ** 2 * K
            norm = collar_norm ** 2
    if variant == "plain":
        K = norm / ell ** 2
    elif variant != "certified":
        raise BadParameters(f"unknown variant {variant!r}")

    def func(e, s):
        c = w.cumulative(e, s)
        rho = np.minimum(c - ca, cb - c)
        pref = np.sqrt(np.maximum((s - a + ell) * (b + ell - s), 0.0) / (b - a + 2 * ell))
        return pref * math.sqrt(K) * np.exp(-rho)

    region = Region(g, {edge: [(a, b)]})
    prov = {"E": E, "a": a, "b": b, "ell": ell, "collar_norm_sq": norm, "collar_kinetic": kin,
            "K": K, "variant": variant, "psi": eigenpair is not None}
    return Envelope("agmon-interval", g, region, func, prov)


def tunneling_envelope(g, V, E, partition=None, ell=None, eigenpair=None, *, variant="certified"):
    """Exponential decay bound deep inside the tunneling set."""
    part = partition or classify_regions(g, V, E)
    T = part.tunneling
    if T.is_empty:
        raise RegionNotTunneling(f"V <= E everywhere at E = {E:g}")
    if not part.boundary:
        raise RegionNotTunneling("tunneling set is the whole graph")
    collars, ell = boundary_collars(T, part.boundary, ell)
    K, norm, kin = collar_energy(collars, V, E, eigenpair)
    offset = ell
    if variant == "plain":
        K, offset = norm / ell ** 2, 0.0
    elif variant != "certified":
        raise BadParameters(f"unknown variant {variant!r}")
    pts = [bp.point for bp in part.boundary]
    dist = metric_distance_field(g, pts)
    w = AgmonWeight(g, V, E)
    rho = DistanceField(g, w, pts)
    validity = T.intersect(metric_superlevel(dist, ell))

    def func(e, s):
        return np.sqrt((dist.along(e, s) + offset) * K) * np.exp(-rho.along(e, s))

    prov = {"E": E, "ell": ell, "collar_norm_sq": norm, "collar_kinetic": kin, "K": K,
            "variant": variant, "boundary_points": len(pts), "psi": eigenpair is not None}
    return Envelope("agmon", g, validity, func, prov)


# --------------------------------------------------------------------------
# delta variant

@dataclass(frozen=True)
class Cut:
    edge: str
    outer: float  # eta = 0 end
    inner: float  # eta = 1 end

    @property
    def interval(self):
        return (min(self.outer, self.inner), max(self.outer, self.inner))

    @property
    def width(self):
        return abs(self.inner - self.outer)


def _inner_side(g, cuts):
    """Flood from the inner ends of the cuts without crossing any cut."""
    blocks = {}
    for c in cuts:
        blocks.setdefault(c.edge, []).append(c.interval)
    segs = {}
    for e in g.edges:
        pts = [0.0]
        for a, b in sorted(blocks.get(e.id, [])):
            pts += [a, b]
        pts.append(e.length)
        segs[e.id] = [(pts[i], pts[i + 1]) for i in range(0, len(pts), 2)]

    def seg_at(eid, s, side):
        for i, (a, b) in enumerate(segs[eid]):
            if (side > 0 and abs(a - s) < 1e-12) or (side < 0 and abs(b - s) < 1e-12):
                return (eid, i)
        raise NoSeparatingInterval("cut endpoints inconsistent")

    def side_of(c, end):
        s = c.inner if end == "inner" else c.outer
        other = c.outer if end == "inner" else c.inner
        return seg_at(c.edge, s, 1 if s > other else -1)

    start = [side_of(c, "inner") for c in cuts]
    forbidden = {side_of(c, "outer") for c in cuts}
    seen = set(start)
    queue = deque(start)
    while queue:
        eid, i = queue.popleft()
        if (eid, i) in forbidden:
            raise NoSeparatingInterval("cuts do not separate the inner side from the outer ends")
        a, b = segs[eid][i]
        e = g.edge(eid)
        ends = []
        if a == 0.0:
            ends.append(e.u)
        if b == e.length:
            ends.append(e.v)
        for v in ends:
            for eid2, end in g.incident(v):
                j = 0 if end == 0 else len(segs[eid2]) - 1
                a2, b2 = segs[eid2][j]
                ok = (end == 0 and a2 == 0.0) or (end == 1 and b2 == g.length(eid2))
                if ok and (eid2, j) not in seen:
                    seen.add((eid2, j))
                    queue.append((eid2, j))
    ivs = {}
    for eid, i in seen:
        ivs.setdefault(eid, []).append(segs[eid][i])
    return Region(g, ivs)


def auto_delta_cuts(g, V, E, delta, component=0):
    """Cuts ``T_{E+delta} minus T_{E+2 delta}`` around one component of ``T_{E+2 delta}``."""
    inner = classify_regions(g, V, E + 2 * delta).tunneling
    comps = inner.components()
    if not comps:
        raise NoSeparatingInterval(f"T_(E+2 delta) is empty for delta = {delta:g}")
    comp = comps[component]
    outer = classify_regions(g, V, E + delta).tunneling
    cuts = []
    for bp in comp.boundary():
        if bp.point.vertex is not None:
            raise NoSeparatingInterval("component boundary at a vertex; choose cuts explicitly")
        eid, direction = bp.outward[0]
        s0 = bp.point.s
        room, stop = _room(outer.complement(), eid, s0, direction)
        if stop == "vertex":
            raise NoSeparatingInterval("cut interval would contain a vertex")
        cuts.append(Cut(eid, s0 + direction * room, s0))
    return cuts


def delta_envelope(g, V, E, delta, cuts, eigenpair=None):
    """Bound on the side of the cuts away from their outer ends.

    Each cut carries a linear ramp of the cutoff. ``cuts[0]`` plays the role of
    the main separating interval; further cuts close off other exits.
    """
    if not delta > 0:
        raise BadParameters("delta must be positive")
    cuts = [c if isinstance(c, Cut) else Cut(*c) for c in cuts]
    if not cuts:
        raise NoSeparatingInterval("no cut intervals given")
    tol = 1e-10 * max(1.0, abs(E))
    for c in cuts:
        a, b = c.interval
        if not (0.0 < a < b < g.length(c.edge)):
            raise NoSeparatingInterval(f"cut on {c.edge} must lie strictly inside the edge")
        if V.on(c.edge).extrema(a, b)[0] < E + delta - tol:
            raise NoSeparatingInterval(f"cut on {c.edge} leaves T_(E+delta)")
    inner = _inner_side(g, cuts)
    for eid, ivs in inner.items():
        for a, b in ivs:
            if V.on(eid).extrema(a, b)[0] < E + delta - tol:
                raise NoSeparatingInterval("the separated side is not contained in T_(E+delta)")
    targets = inner.intersect(classify_regions(g, V, E + 2 * delta).tunneling.union(
        _level_set(g, V, E + 2 * delta)))
    if targets.is_empty:
        raise NoSeparatingInterval("no target points in T_(E+2 delta)")
    w = SqrtDensityWeight(
        g, lambda eid, s: np.asarray(V(eid, s), float) - E - delta,
        breakpoints=lambda eid: V.on(eid).breakpoints(g.length(eid)),
        constant=lambda eid: (float(V.on(eid)(0.0)) - E - delta) if V.on(eid).is_constant else None)
    outer_pts = [g.point(c.edge, c.outer) for c in cuts]
    F = DistanceField(g, w, outer_pts)
    terms, norms = [], []
    for c in cuts:
        a, b = c.interval
        lead = math.exp(2.0 * w(c.edge, a, b)) * (1.0 / c.width ** 2 + 2.0 * w.max_density(c.edge, a, b) / c.width)
        n = eigenpair.integral(c.edge, a, b) if eigenpair is not None else None
        terms.append(lead)
        norms.append(n)
    if eigenpair is not None:
        X = sum(t * n for t, n in zip(terms, norms))
    else:
        X = max(terms)
    X /= math.sqrt(delta)

    def func(e, s):
        return math.sqrt(X) * np.exp(-F.along(e, s))

    prov = {"E": E, "delta": delta, "cuts": [(c.edge, c.outer, c.inner) for c in cuts],
            "L": [c.width for c in cuts], "ramp_factors": terms, "cut_norm_sq": norms, "X": X}
    return Envelope("agmon-delta", g, targets, func, prov)


def _level_set(g, V, E):
    """Closed superlevel complement helper: points where ``V >= E`` exactly on constant edges."""
    out = {}
    for e in g.edges:
        d = V.on(e.id)
        if d.is_constant and float(d(0.0)) >= E:
            out[e.id] = [(0.0, e.length)]
    return Region(g, out)
