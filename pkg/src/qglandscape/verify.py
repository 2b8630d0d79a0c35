"""Domination reports, maximum-principle and Boggio checks, Harnack constants,
and the regime selector."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .agmon import metric_distance_field
from .exceptions import BadParameters, PathNotFound
from .graph import GraphPath, GraphPoint, MetricGraph, shortest_path, metric_weight
from .regions import Region, positive_intervals

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


# --------------------------------------------------------------------------
# domination

@dataclass
class DominationReport:
    envelope: str
    eigenpair: int
    grid: dict = field(repr=False)  # edge -> s
    margin: dict = field(repr=False)  # edge -> upsilon - |psi|
    worst_margin: float
    worst_location: tuple
    tol: float
    violations: list = field(default_factory=list, repr=False)

    @property
    def passed(self):
        return self.worst_margin >= -self.tol

    def summary(self):
        state = "pass" if self.passed else "FAIL"
        e, s = self.worst_location
        return (f"{self.envelope} vs psi_{self.eigenpair}: {state}, worst margin {self.worst_margin:.3e} "
                f"at ({e}, {s:.6g}), {len(self.violations)} violations")


def check_domination(psi, envelope, n=512, tol=None):
    """Compare ``envelope`` with ``|psi|`` on ``n`` points per valid interval."""
    if envelope.validity.is_empty:
        raise BadParameters("envelope has an empty validity region")
    if tol is None:
        tol = 1e-6 * max(1.0, psi.sup_norm())
    grid, margin, viol = {}, {}, []
    worst, where = math.inf, (None, math.nan)
    for eid, (s, vals) in envelope.sample(n).items():
        m = vals - np.abs(psi.values(eid, s))
        grid[eid], margin[eid] = s, m
        i = int(np.argmin(m))
        if m[i] < worst:
            worst, where = float(m[i]), (eid, float(s[i]))
        viol += [(eid, float(x), float(y)) for x, y in zip(s[m < -tol], m[m < -tol])]
    return DominationReport(envelope.method, psi.index, grid, margin, worst, where, tol, viol)


# --------------------------------------------------------------------------
# vertex conditions and the maximum principle

def super_kirchhoff_sums(g: MetricGraph, derivative):
    """Outgoing-derivative sums of a function with per-edge ``derivative(edge, s)``."""
    out = {}
    for v in g.vertices:
        tot = 0.0
        for eid, end in g.incident(v):
            s = 0.0 if end == 0 else g.length(eid)
            tot += g.outgoing(eid, end) * float(np.asarray(derivative(eid, np.array([s])))[0])
        out[v] = tot
    return out


def strict_local_maxima(g: MetricGraph, grid):
    """Strict local maxima of ``w_+`` from samples ``{edge: (s, w)}`` covering each edge.

    Grid endpoints are the vertices; a vertex is a strict maximum when every
    neighbouring sample on every incident edge is smaller.
    """
    found = []
    for eid, (s, w) in grid.items():
        wp = np.maximum(np.asarray(w, float), 0.0)
        inner = (wp[1:-1] > wp[:-2]) & (wp[1:-1] > wp[2:]) & (wp[1:-1] > 0)
        found += [(eid, float(x)) for x in np.asarray(s)[1:-1][inner]]
    for v in g.vertices:
        vals, nbrs = [], []
        for eid, end in g.incident(v):
            s, w = grid[eid]
            wp = np.maximum(np.asarray(w, float), 0.0)
            vals.append(wp[0] if end == 0 else wp[-1])
            nbrs.append(wp[1] if end == 0 else wp[-2])
        if vals[0] > 0 and all(vals[0] > x for x in nbrs):
            found.append(("vertex", v))
    return found


def boggio_check(g: MetricGraph, phi, dphi, d2phi, f, df, cells=256):
    """Both sides of ``int |f'|^2 >= int f^2 (-phi''/phi)`` and the outgoing derivative sums of ``phi``.

    The inequality holds for every ``f`` when all sums are ``<= 0``: the
    ground-state substitution leaves ``-sum_v f(v)^2 / phi(v) * sum_out phi'``.
    """
    lhs = rhs = 0.0
    for e in g.edges:
        knots = np.linspace(0.0, e.length, cells + 1)
        mid, half = 0.5 * (knots[1:] + knots[:-1]), 0.5 * np.diff(knots)
        x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        w = (half[:, None] * _GL_W[None, :]).ravel()
        p = np.asarray(phi(e.id, x), float)
        if np.any(p <= 0):
            raise BadParameters(f"phi must be positive; fails on edge {e.id}")
        lhs += float(np.sum(w * np.asarray(df(e.id, x), float) ** 2))
        rhs += float(np.sum(w * np.asarray(f(e.id, x), float) ** 2 * (-np.asarray(d2phi(e.id, x), float) / p)))
    sums = super_kirchhoff_sums(g, dphi)
    return {"lhs": lhs, "rhs": rhs, "holds": lhs >= rhs - 1e-10 * max(1.0, abs(lhs)),
            "vertex_sums": sums, "super_kirchhoff": all(v <= 1e-10 for v in sums.values())}


# --------------------------------------------------------------------------
# Harnack

def _as_region(g, W):
    if isinstance(W, Region):
        return W, W.measure
    if isinstance(W, GraphPath):
        ivs = {}
        for seg in W.segments:
            ivs.setdefault(seg.edge, []).append((min(seg.entry, seg.exit), max(seg.entry, seg.exit)))
        return Region(g, ivs), W.length
    raise BadParameters("W must be a Region, GraphPath, GraphPoint or a pair of GraphPoints")


def harnack_constant(g, V, E, W, U=None, *, ell=None):
    """``exp(sqrt(|P| max(0, 2 int eta^2 (V - E) + 4 int eta'^2)))``.

    ``W`` may be a point (constant 1), a pair of points (joined by a shortest
    path inside ``U``), an explicit path, or a connected region; for a region
    every simple path in it is covered by taking ``|P| <= |W|`` and ``eta = 1``
    on all of ``W``.
    """
    if isinstance(W, GraphPoint):
        return 1.0, {"path_length": 0.0, "potential_term": 0.0, "ramp_term": 0.0, "clamped": False}
    if isinstance(W, tuple) and len(W) == 2 and all(isinstance(p, GraphPoint) for p in W):
        if W[0] == W[1]:
            return harnack_constant(g, V, E, W[0])
        _, P = shortest_path(g, metric_weight, [W[0]], W[1])
        W = P
        if U is not None:
            reg, _ = _as_region(g, P)
            if not reg.intersect(U.complement()).is_empty and reg.intersect(U.complement()).measure > 1e-12:
                raise PathNotFound("shortest path between the points leaves U")
    reg, plen = _as_region(g, W)
    if reg.is_empty:
        if plen == 0:
            return 1.0, {"path_length": 0.0, "potential_term": 0.0, "ramp_term": 0.0, "clamped": False}
        raise PathNotFound("empty path region")
    if len(reg.components()) != 1:
        raise PathNotFound("W is not connected")
    ell = g.min_edge_length / 2 if ell is None else float(ell)
    bd = reg.boundary()
    if U is not None:
        ubd = U.boundary()
        if ubd:
            du = metric_distance_field(g, [b.point for b in ubd])
            clearance = min(du.at(b.point) for b in bd) if bd else math.inf
            if not reg.intersect(U.complement()).measure <= 1e-12:
                raise PathNotFound("W is not contained in U")
            ell = min(ell, clearance)
            if ell <= 0:
                raise PathNotFound("W touches the boundary of U")
    pot = ramp_measure = 0.0
    dist = metric_distance_field(g, [b.point for b in bd]) if bd else None
    for e in g.edges:
        d = V.on(e.id)
        inside = reg.intervals(e.id)
        pieces = [(a, b, True) for a, b in inside]
        if dist is not None:
            collar = positive_intervals(lambda s: ell - dist.along(e.id, s), e.length, n_scan=1024,
                                        breakpoints=[x for iv in inside for x in iv])
            outside = Region(g, {e.id: collar}).intersect(reg.complement()).intervals(e.id)
            pieces += [(a, b, False) for a, b in outside]
        for a, b, is_in in pieces:
            if b <= a:
                continue
            knots = np.linspace(a, b, 65)
            mid, half = 0.5 * (knots[1:] + knots[:-1]), 0.5 * np.diff(knots)
            x = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
            w = (half[:, None] * _GL_W[None, :]).ravel()
            eta = np.ones_like(x) if is_in else np.clip(1.0 - dist.along(e.id, x) / ell, 0.0, 1.0)
            pot += float(np.sum(w * eta ** 2 * (np.asarray(d(x), float) - E)))
            if not is_in:
                ramp_measure += b - a
    ramp = ramp_measure / ell ** 2
    inner = 2.0 * pot + 4.0 * ramp
    C = math.exp(math.sqrt(plen * max(0.0, inner)))
    return C, {"path_length": plen, "potential_term": pot, "ramp_term": ramp, "ell": ell,
               "clamped": inner < 0}


# --------------------------------------------------------------------------
# regimes

LABELS = ("tunneling", "transition", "allowed-moderate", "high-energy")
FAMILIES = {
    "tunneling": ("agmon", "agmon-interval", "agmon-delta"),
    "transition": ("window", "gronwall"),
    "allowed-moderate": ("torsion", "torsion-agmon"),
    "high-energy": ("davies", "oscillation", "uniform"),
}


@dataclass
class RegimeMap:
    grid: dict  # edge -> s
    labels: dict  # edge -> array of label strings
    delta_t: float
    tau: float
    ratio: float

    def regions(self, graph):
        """Label -> Region built from runs of equal labels (midpoint split)."""
        out = {lab: {} for lab in LABELS}
        for eid, s in self.grid.items():
            lab = self.labels[eid]
            cuts = np.concatenate([[s[0]], 0.5 * (s[1:] + s[:-1]), [s[-1]]])
            start = 0
            for i in range(1, len(s) + 1):
                if i == len(s) or lab[i] != lab[start]:
                    out[lab[start]].setdefault(eid, []).append((cuts[start], cuts[i]))
                    start = i
        return {lab: Region(graph, ivs) for lab, ivs in out.items()}

    def plan(self, graph):
        return [(lab, reg, FAMILIES[lab]) for lab, reg in self.regions(graph).items() if not reg.is_empty]

    def fraction(self, label):
        tot = sum(len(v) for v in self.labels.values())
        return sum(int(np.sum(v == label)) for v in self.labels.values()) / tot


def select_regime(g, V, E, *, delta_t=0.0, tau=None, ratio=5.0, n=512):
    """Per-point regime labels; priority transition > tunneling > high-energy > allowed."""
    tau = 0.05 * max(1.0, E) if tau is None else float(tau)
    vmax = V.maximum(g)
    high = E >= ratio * vmax if vmax > 0 else E > 0
    grid, labels = {}, {}
    for e in g.edges:
        s = np.linspace(0.0, e.length, n)
        diff = np.asarray(V(e.id, s), float) - E
        lab = np.full(n, "high-energy" if high else "allowed-moderate", dtype=object)
        tun = diff > delta_t if delta_t == 0 else diff >= delta_t
        lab[tun] = "tunneling"
        lab[np.abs(diff) < tau] = "transition"
        grid[e.id], labels[e.id] = s, lab
    return RegimeMap(grid, labels, delta_t, tau, ratio)


def eigen_residual(eigenpair):
    """Relative residuals of a sampled eigenfunction.

    ``ode``: max |-psi'' + (V - E) psi| with psi'' from a five-point stencil on
    the stored derivative samples (uniform grids only), scaled by
    ``max(1, |E|) ||psi||_inf``. ``continuity`` and ``kirchhoff`` are the vertex
    mismatches scaled by ``||psi||_inf`` and ``sqrt(max(1, |E|)) ||psi||_inf``.
    """
    E = eigenpair.energy
    sup = max(eigenpair.sup_norm(), 1e-300)
    ode = 0.0
    for e in eigenpair.graph.edges:
        s, u, du = eigenpair.samples[e.id]
        h = s[1] - s[0]
        if len(s) < 5 or not np.allclose(np.diff(s), h, rtol=1e-9, atol=0.0):
            raise BadParameters(f"edge {e.id}: residual needs a uniform grid of at least 5 samples")
        d2 = np.empty_like(du)
        d2[2:-2] = (du[:-4] - 8 * du[1:-3] + 8 * du[3:-1] - du[4:]) / (12 * h)
        d2[:2] = [(-25 * du[i] + 48 * du[i + 1] - 36 * du[i + 2] + 16 * du[i + 3] - 3 * du[i + 4]) / (12 * h)
                  for i in (0, 1)]
        d2[-2:] = [(25 * du[i] - 48 * du[i - 1] + 36 * du[i - 2] - 16 * du[i - 3] + 3 * du[i - 4]) / (12 * h)
                   for i in (len(s) - 2, len(s) - 1)]
        r = -d2 + (np.asarray(eigenpair.potential(e.id, s), float) - E) * u
        ode = max(ode, float(np.max(np.abs(r))))
    cont = max((max(v) - min(v) for v in eigenpair.vertex_values().values()), default=0.0)
    kir = max((abs(x) for x in eigenpair.kirchhoff_sums().values()), default=0.0)
    scale = max(1.0, abs(E))
    return {"ode": ode / (scale * sup), "continuity": cont / sup, "kirchhoff": kir / (math.sqrt(scale) * sup)}
