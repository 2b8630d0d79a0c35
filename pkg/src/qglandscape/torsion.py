"""Explicit supersolutions ``H Upsilon >= 1`` built from truncated Gaussians.

A piece lives on a chart: one or more edge segments mapped affinely onto a
local coordinate ``u`` (signed distance from the piece center). Pieces are
glued at junction points after quadratic ramps zero their end derivatives;
per-piece constants restore continuity and a global constant ``c0`` repairs
whatever the ramps cost in ``H Upsilon``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .agmon import SqrtDensityWeight, metric_distance_field, metric_superlevel
from .envelope import Envelope
from .exceptions import (
    AssemblyInfeasible,
    BadParameters,
    DegenerateMinorant,
    EmptyRegion,
    SupersolutionFailure,
    UnverifiedSupersolution,
)
from .graph import DistanceField
from .regions import Region, positive_intervals

SLACK_TOL = 1e-8


@dataclass(frozen=True)
class QuadraticMinorant:
    """``V + shift >= V1 + b^2 u^2`` on the chart of a piece."""

    V1: float
    b: float
    center: object  # edge coordinate or vertex id
    interval: tuple  # (u_min, u_max)
    slack: float = 0.0


@dataclass(frozen=True)
class Segment:
    edge: str
    a: float
    b: float
    sign: int  # u = sign * s + offset
    offset: float
    free: tuple = (True, True)  # end at a / end at b is a piece end

    def u(self, s):
        return self.sign * np.asarray(s, dtype=float) + self.offset


def fit_minorant_samples(u, values, *, n_grid=200):
    """Maximize ``b + V1/2`` subject to ``values >= V1 + b^2 u^2`` on the samples."""
    u = np.asarray(u, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.min(values) < 0:
        raise BadParameters("minorant fit needs a nonnegative potential")
    nz = np.abs(u) > 1e-12 * max(1.0, np.max(np.abs(u)))
    b_cap = math.sqrt(np.min(values[nz] / u[nz] ** 2)) if np.any(nz) else 0.0

    def phi(b):
        return b + 0.5 * np.min(values - b * b * u * u)

    best_b, best = 0.0, phi(0.0)
    if b_cap > 0:
        grid = b_cap * np.concatenate([[1.0], np.logspace(-4, 0, n_grid)])
        vals = np.array([phi(b) for b in grid])
        i = int(np.argmax(vals))
        if vals[i] > best:
            best_b, best = grid[i], vals[i]
        lo = grid[max(i - 1, 0)] if i > 0 else 0.0
        hi = min(b_cap, grid[min(i + 1, len(grid) - 1)] * 1.05)
        if hi > lo:
            res = minimize_scalar(lambda b: -phi(b), bounds=(lo, hi), method="bounded",
                                  options={"xatol": 1e-12 * max(1.0, hi)})
            if -res.fun > best:
                best_b, best = float(res.x), -float(res.fun)
    V1 = float(np.min(values - best_b ** 2 * u ** 2))
    return max(V1, 0.0) if V1 > -1e-14 else V1, float(best_b)


def fit_minorant(V, edge, interval, y, *, shift=0.0, n_check=4001):
    """Quadratic minorant of ``V + shift`` on ``interval`` centred at ``y``."""
    x1, x2 = interval
    s = np.linspace(x1, x2, n_check)
    vals = np.asarray(V(edge, s), float) + shift
    V1, b = fit_minorant_samples(s - y, vals)
    slack = float(np.min(vals - V1 - b * b * (s - y) ** 2))
    return QuadraticMinorant(V1, b, y, (x1 - y, x2 - y), slack)


def _f(u, V1, b):
    return 0.5 * (V1 + b * b * u * u) + (b + V1) * np.exp(-0.5 * b * u * u)


def amplitude(minorant: QuadraticMinorant, interval=None):
    """``(A, A0)`` for the Gaussian piece of a minorant."""
    V1, b = minorant.V1, minorant.b
    if b <= 0:
        raise DegenerateMinorant("b = 0: use a quadratic piece")
    u1, u2 = interval if interval is not None else minorant.interval
    cands = [_f(u1, V1, b), _f(u2, V1, b)]
    if V1 > 0:
        x2 = -(2.0 / b) * math.log(b / (b + V1))
        xs = math.sqrt(x2)
        for x in (-xs, xs):
            if u1 <= x <= u2:
                cands.append(_f(x, V1, b))
    elif u1 <= 0.0 <= u2:
        cands.append(_f(0.0, V1, b))
    return 1.0 / min(cands), 1.0 / (b + V1 / 2)


# --------------------------------------------------------------------------

@dataclass
class TorsionPiece:
    segments: tuple
    minorant: QuadraticMinorant
    kind: str  # "gaussian" | "quadratic"
    A: float = 0.0
    A0: float = 0.0
    a1: float = 0.0
    b1: float = 0.0
    eps: dict = field(default_factory=dict)  # (segment index, end) -> ramp width
    center_vertex: str | None = None
    grade: str = "landscape"
    label: str = ""

    # profile in the local coordinate
    def profile(self, u):
        u = np.asarray(u, dtype=float)
        if self.kind == "gaussian":
            b = self.minorant.b
            e = np.exp(-0.5 * b * u * u)
            return self.A * (0.5 + e), -self.A * b * u * e, self.A * b * (b * u * u - 1.0) * e
        return self.a1 - self.b1 * u * u, -2.0 * self.b1 * u, np.full(u.shape, -2.0 * self.b1)

    def _ramp_slope(self, k, end):
        seg = self.segments[k]
        p = seg.a if end == 0 else seg.b
        direction = 1 if end == 0 else -1
        _, d1, _ = self.profile(seg.u(np.array([p])))
        return direction * seg.sign * float(d1[0])  # inward derivative in s

    def evaluate(self, k, s, outside_ramp=None):
        """Value, first and second s-derivative on segment ``k`` (ramps included)."""
        seg = self.segments[k]
        s = np.asarray(s, dtype=float)
        f, d1, d2 = self.profile(seg.u(s))
        d1 = seg.sign * d1
        for end, p, direction in ((0, seg.a, 1), (1, seg.b, -1)):
            eps = self.eps.get((k, end))
            if not eps:
                continue
            D = self._ramp_slope(k, end)
            t = direction * (s - p)
            inside = (t >= 0) & (t < eps) if outside_ramp is None else (t >= 0) & (t <= eps) & ~outside_ramp
            r = 1.0 - t / eps
            f = f + np.where(inside, 0.5 * eps * D * r * r, 0.0)
            d1 = d1 + np.where(inside, -direction * D * r, 0.0)
            d2 = d2 + np.where(inside, D / eps, 0.0)
        return f, d1, d2

    def end_value(self, k, end):
        seg = self.segments[k]
        p = seg.a if end == 0 else seg.b
        return float(self.evaluate(k, np.array([p]))[0][0])

    def piece_ends(self):
        return [(k, end) for k, seg in enumerate(self.segments) for end in (0, 1) if seg.free[end]]


def _gaussian_or_quadratic(minorant, grade_note=None):
    if minorant.b > 0:
        A, A0 = amplitude(minorant)
        return dict(kind="gaussian", A=A, A0=A0)
    V1 = minorant.V1
    u1, u2 = minorant.interval
    X2 = max(u1 * u1, u2 * u2)
    if V1 > 0:
        return dict(kind="quadratic", a1=1.0 / V1, b1=0.0, grade="uniform-grade")
    return dict(kind="quadratic", a1=0.5 * X2 + 1.0, b1=0.5, grade="uniform-grade")


def interval_piece(g, V, edge, x1, x2, *, y=None, shift=0.0, n_check=4001, label=""):
    """Piece on ``[x1, x2]`` of one edge centred at ``y`` (default midpoint)."""
    L = g.length(edge)
    if not 0 <= x1 < x2 <= L:
        raise BadParameters("need 0 <= x1 < x2 <= |e|")
    y = 0.5 * (x1 + x2) if y is None else float(y)
    mino = fit_minorant(V, edge, (x1, x2), y, shift=shift, n_check=n_check)
    seg = Segment(edge, float(x1), float(x2), 1, -y)
    return TorsionPiece((seg,), mino, label=label or f"{edge}[{x1:.4g},{x2:.4g}]",
                        **_gaussian_or_quadratic(mino))


def star_piece(g, V, vertex, radius, *, shift=0.0, privileged=None, n_check=2001, label=""):
    """Piece on a star of the given radius around ``vertex``.

    ``privileged=(edge, end, d)`` moves the centre a distance ``d`` into that
    edge end; otherwise the centre is the vertex itself.
    """
    arms = []
    us, vals = [], []
    for eid, end in g.incident(vertex):
        L = g.length(eid)
        limit = L / 2 if g.edge(eid).is_loop else L
        if radius > limit * (1 + 1e-12):
            raise AssemblyInfeasible(f"star radius {radius:g} exceeds room on edge {eid}")
        d = 0.0
        arm_sign = 1
        if privileged is not None:
            d = float(privileged[2])
            arm_sign = 1 if (eid, end) == tuple(privileged[:2]) else -1
        # u = arm_sign * r - d where r is the distance from the vertex
        if end == 0:
            seg = Segment(eid, 0.0, float(radius), arm_sign, -d, (False, True))
        else:
            seg = Segment(eid, L - radius, L, -arm_sign, arm_sign * L - d, (True, False))
        arms.append(seg)
        s = np.linspace(seg.a, seg.b, n_check)
        us.append(seg.u(s))
        vals.append(np.asarray(V(eid, s), float) + shift)
    u, v = np.concatenate(us), np.concatenate(vals)
    V1, b = fit_minorant_samples(u, v)
    mino = QuadraticMinorant(V1, b, vertex, (float(u.min()), float(u.max())),
                             float(np.min(v - V1 - b * b * u * u)))
    return TorsionPiece(tuple(arms), mino, center_vertex=vertex, label=label or f"star({vertex})",
                        **_gaussian_or_quadratic(mino))


# --------------------------------------------------------------------------

def _junctions(pieces, g):
    """Group piece ends by location."""
    groups = {}
    for i, pc in enumerate(pieces):
        for k, end in pc.piece_ends():
            seg = pc.segments[k]
            s = seg.a if end == 0 else seg.b
            p = g.point(seg.edge, s, tol=1e-12 * g.length(seg.edge))
            groups.setdefault(p, []).append((i, k, end))
    return groups


def _coverage(pieces, g):
    ivs = {}
    for pc in pieces:
        for seg in pc.segments:
            ivs.setdefault(seg.edge, []).append((seg.a, seg.b))
    for eid, lst in ivs.items():
        lst.sort()
        for (a0, b0), (a1, b1) in zip(lst, lst[1:]):
            if a1 < b0 - 1e-12:
                raise AssemblyInfeasible(f"pieces overlap on edge {eid}")
    return Region(g, ivs)


class LandscapeFunction:
    """Assembled ``Upsilon = c0 + sum_i (piece_i + c_i)`` with ``H Upsilon >= 1``."""

    def __init__(self, graph, potential, pieces, constants, c0, shift, mode, region):
        self.graph = graph
        self.potential = potential
        self.pieces = list(pieces)
        self.constants = list(constants)
        self.c0 = float(c0)
        self.shift = float(shift)
        self.mode = mode
        self.region = region
        self.report = {}
        self.verified = False

    def _locate(self, edge, s):
        s = np.asarray(s, dtype=float)
        owner = np.full(s.shape, -1)
        segk = np.full(s.shape, -1)
        for i, pc in enumerate(self.pieces):
            for k, seg in enumerate(pc.segments):
                if seg.edge == edge:
                    m = (owner < 0) & (s >= seg.a - 1e-12) & (s <= seg.b + 1e-12)
                    owner[m], segk[m] = i, k
        return owner, segk

    def evaluate(self, edge, s):
        s = np.asarray(s, dtype=float)
        f, d1, d2 = (np.full(s.shape, np.nan) for _ in range(3))
        owner, segk = self._locate(edge, s)
        for i, k in set(zip(owner.ravel().tolist(), segk.ravel().tolist())):
            if i < 0:
                continue
            m = (owner == i) & (segk == k)
            a, b_, c = self.pieces[i].evaluate(k, s[m])
            f[m] = a + self.constants[i] + self.c0
            d1[m], d2[m] = b_, c
        return f, d1, d2

    def __call__(self, edge, s):
        return self.evaluate(edge, s)[0]

    def h_upsilon(self, edge, s):
        f, _, d2 = self.evaluate(edge, s)
        return -d2 + (np.asarray(self.potential(edge, s), float) + self.shift) * f

    def minimum(self, n=2048):
        return min(float(np.min(self(seg.edge, np.linspace(seg.a, seg.b, n))))
                   for pc in self.pieces for seg in pc.segments)

    def maximum(self, n=2048):
        return max(float(np.max(self(seg.edge, np.linspace(seg.a, seg.b, n))))
                   for pc in self.pieces for seg in pc.segments)


def _grid(pc, k, n):
    seg = pc.segments[k]
    pts = [np.linspace(seg.a, seg.b, n)]
    for end, p, direction in ((0, seg.a, 1), (1, seg.b, -1)):
        eps = pc.eps.get((k, end))
        if eps:
            pts.append(np.array([p + direction * eps]))
    return np.unique(np.concatenate(pts))


def _slack_terms(pc, k, s, constant, shift, V, outside=None):
    seg = pc.segments[k]
    f, _, d2 = pc.evaluate(k, s, outside_ramp=outside)
    Vs = np.asarray(V(seg.edge, s), float) + shift
    return -d2 + Vs * (f + constant), Vs


def assemble_landscape(g, V, pieces, *, shift=0.0, mode="auto", eps=None, n_grid=2049, region=None):
    """Glue pieces into a verified ``LandscapeFunction``.

    ``mode`` is ``"additive"`` (nonnegative constants matching junction values),
    ``"zero-ends"`` (every piece lowered to vanish at its ends) or ``"auto"``
    (additive when the junction system is consistent, else zero-ends).
    """
    pieces = list(pieces)
    if not pieces:
        raise BadParameters("no pieces")
    covered = _coverage(pieces, g)
    groups = _junctions(pieces, g)
    junctions = {p: ends for p, ends in groups.items() if len(ends) > 1}
    joined = {(i, k, end) for ends in junctions.values() for (i, k, end) in ends}
    for i, pc in enumerate(pieces):
        pc.eps = {}
        for k, end in pc.piece_ends():
            if (i, k, end) in joined:
                seg = pc.segments[k]
                width = eps if eps is not None else 0.05 * (seg.b - seg.a)
                pc.eps[(k, end)] = min(width, 0.5 * (seg.b - seg.a))
    values = {(i, k, end): pieces[i].end_value(k, end) for (i, k, end) in joined}

    constants = None
    used = mode
    if mode in ("auto", "additive"):
        constants = _additive_constants(pieces, junctions, values)
        if constants is None:
            if mode == "additive":
                raise AssemblyInfeasible("junction values admit no consistent constants (closed cycle)")
            used = "zero-ends"
        else:
            used = "additive"
    if used == "zero-ends":
        constants = []
        for i, pc in enumerate(pieces):
            ends = [values[(i, k, e)] for (k, e) in pc.piece_ends() if (i, k, e) in values]
            if ends and max(ends) - min(ends) > 1e-10 * max(1.0, max(abs(x) for x in ends)):
                raise AssemblyInfeasible(f"piece {pc.label} has unequal end values; centre it")
            constants.append(-ends[0] if ends else 0.0)
    elif used not in ("additive",):
        raise BadParameters(f"unknown mode {mode!r}")

    c0 = 0.0
    for _ in range(4):
        need = 0.0
        for i, pc in enumerate(pieces):
            for k in range(len(pc.segments)):
                s = _grid(pc, k, n_grid)
                for outside in (None, True):
                    hv, Vs = _slack_terms(pc, k, s, constants[i], shift, V,
                                          None if outside is None else np.ones(s.shape, bool))
                    deficit = 1.0 - hv
                    bad = deficit > 0
                    if np.any(bad & (Vs <= 0)):
                        raise SupersolutionFailure(
                            f"H Upsilon < 1 where V + shift = 0 on piece {pc.label}",
                            worst_slack=float(np.min(hv[bad & (Vs <= 0)]) - 1.0))
                    if np.any(bad):
                        need = max(need, float(np.max(deficit[bad] / Vs[bad])))
        if need <= c0 * (1 + 1e-14):
            break
        c0 = need * (1 + 1e-12)
        n_grid = 2 * n_grid - 1
    lf = LandscapeFunction(g, V, pieces, constants, c0, shift, used, region or covered)
    verify_landscape(lf, n_grid=n_grid)
    return lf


def _additive_constants(pieces, junctions, values):
    n = len(pieces)
    jl = list(junctions)
    rows, rhs = [], []
    for j, p in enumerate(jl):
        for (i, k, end) in junctions[p]:
            r = np.zeros(n + len(jl))
            r[i], r[n + j] = 1.0, -1.0
            rows.append(r)
            rhs.append(-values[(i, k, end)])
    if not rows:
        return [0.0] * n
    M, y = np.array(rows), np.array(rhs)
    x, *_ = np.linalg.lstsq(M, y, rcond=None)
    scale = max(1.0, float(np.max(np.abs(y))))
    if np.max(np.abs(M @ x - y)) > 1e-10 * scale:
        return None
    c = x[:n]
    return list(c - c.min())


def verify_landscape(lf: LandscapeFunction, n_grid=2049):
    """Grid certificate: ``H Upsilon >= 1``, positivity, C1 junctions, vertex sums."""
    g = lf.graph
    worst = math.inf
    positive = math.inf
    for i, pc in enumerate(lf.pieces):
        for k in range(len(pc.segments)):
            s = _grid(pc, k, n_grid)
            for outside in (None, np.ones(s.shape, bool)):
                f, _, d2 = pc.evaluate(k, s, outside_ramp=outside)
                f = f + lf.constants[i] + lf.c0
                Vs = np.asarray(lf.potential(pc.segments[k].edge, s), float) + lf.shift
                worst = min(worst, float(np.min(-d2 + Vs * f)) - 1.0)
                positive = min(positive, float(np.min(f)))
    jumps, djumps = 0.0, 0.0
    for p, ends in _junctions(lf.pieces, g).items():
        if len(ends) < 2:
            continue
        vals, ders = [], []
        for (i, k, end) in ends:
            seg = lf.pieces[i].segments[k]
            s = seg.a if end == 0 else seg.b
            f, d1, _ = lf.pieces[i].evaluate(k, np.array([s]))
            vals.append(f[0] + lf.constants[i])
            ders.append(d1[0])
        jumps = max(jumps, max(vals) - min(vals))
        djumps = max(djumps, max(abs(d) for d in ders))
    sums = {}
    for pc in lf.pieces:
        if pc.center_vertex is None:
            continue
        tot = 0.0
        for k, seg in enumerate(pc.segments):
            at_start = not seg.free[0]
            s = seg.a if at_start else seg.b
            _, d1, _ = pc.evaluate(k, np.array([s]))
            tot += d1[0] if at_start else -d1[0]
        sums[pc.center_vertex] = tot
    comparison = {v: -t for v, t in sums.items()}
    lf.report = {
        "worst_slack": worst,
        "min_value": positive,
        "junction_value_jump": jumps,
        "junction_derivative": djumps,
        "vertex_derivative_sums": sums,
        "comparison_kirchhoff_sums": comparison,
        "c0": lf.c0,
        "mode": lf.mode,
        "grid": n_grid,
    }
    scale = max(1.0, lf.maximum())
    ok = (worst >= -SLACK_TOL and positive > 0 and jumps <= 1e-9 * scale and djumps <= 1e-9 * scale
          and all(v >= -SLACK_TOL for v in comparison.values()))
    lf.verified = ok
    if worst < -SLACK_TOL:
        raise SupersolutionFailure(f"H Upsilon - 1 reaches {worst:.3g}", worst_slack=worst)
    if positive <= 0:
        raise SupersolutionFailure("Upsilon is not positive", worst_slack=worst)
    return lf.report


# --------------------------------------------------------------------------
# builders

def cover_edges(g, V, *, shift=0.0, split_at_maxima=True, n_scan=2048):
    """One centred piece per well: each edge is split at interior local maxima of V."""
    pieces = []
    for e in g.edges:
        s = np.linspace(0.0, e.length, n_scan + 1)
        v = np.asarray(V(e.id, s), float)
        cuts = [0.0]
        if split_at_maxima:
            idx = np.where((v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:]))[0] + 1
            for i in idx:
                if s[i] - cuts[-1] > 0.05 * e.length and e.length - s[i] > 0.05 * e.length:
                    cuts.append(float(s[i]))
        cuts.append(e.length)
        for a, b in zip(cuts[:-1], cuts[1:]):
            pieces.append(interval_piece(g, V, e.id, a, b, shift=shift))
    return pieces


def build_landscape(g, V, *, shift=0.0, mode="auto", pieces=None, **kw):
    return assemble_landscape(g, V, pieces if pieces is not None else cover_edges(g, V, shift=shift),
                              shift=shift, mode=mode, **kw)


# --------------------------------------------------------------------------
# envelopes

def max_principle_envelope(lf: LandscapeFunction, E, psi_sup, boundary_values=None, eigenpair=None):
    """``max_bd (|psi| - E' psi_sup Upsilon)_+ + E' psi_sup Upsilon`` on the covered region."""
    if not lf.verified:
        raise UnverifiedSupersolution("landscape function has not passed verification")
    Ep = float(E) + lf.shift
    if Ep < 0:
        raise BadParameters("E + shift must be nonnegative")
    scale = Ep * float(psi_sup)
    bd = lf.region.boundary()
    vals = []
    for bp in bd:
        p = bp.point
        if boundary_values is not None and p in boundary_values:
            psi_b = abs(float(boundary_values[p]))
        elif eigenpair is not None:
            psi_b = abs(eigenpair.evaluate(p)[0])
        else:
            raise BadParameters(f"no boundary value for {p}")
        u = float(lf(p.edge, np.array([p.s]))[0])
        vals.append(max(psi_b - scale * u, 0.0))
    W = max(vals) if vals else 0.0

    def func(e, s):
        return W + scale * lf(e, s)

    prov = {"E": E, "shift": lf.shift, "psi_sup": psi_sup, "boundary_excess": W, "c0": lf.c0,
            "mode": lf.mode, "worst_slack": lf.report.get("worst_slack")}
    return Envelope("torsion", lf.graph, lf.region, func, prov)


def torsion_agmon_extension(lf: LandscapeFunction, E, delta, eigenpair=None, ell=None):
    """Agmon-type decay with density ``sqrt(1/Upsilon - E' - delta)``."""
    if not lf.verified:
        raise UnverifiedSupersolution("landscape function has not passed verification")
    if not delta > 0:
        raise BadParameters("delta must be positive")
    if any(v > SLACK_TOL for v in lf.report.get("vertex_derivative_sums", {}).values()):
        raise UnverifiedSupersolution("Boggio's inequality needs nonpositive outgoing derivative sums")
    g = lf.graph
    Ep = float(E) + lf.shift

    def q(eid, s):
        out = np.full(np.shape(s), -1.0)
        m = lf.region.contains(eid, s)
        if np.any(m):
            out[m] = 1.0 / lf(eid, np.asarray(s)[m]) - Ep - delta
        return out

    R = {}
    for e in g.edges:
        ivs = positive_intervals(lambda s, eid=e.id: q(eid, s), e.length, n_scan=2048, ztol=-1e-15)
        R[e.id] = ivs
    R = Region(g, R).intersect(lf.region)
    if R.is_empty:
        raise EmptyRegion(f"1/Upsilon - E' >= delta nowhere (E = {E:g}, delta = {delta:g})")
    bd = R.boundary()
    if not bd:
        raise EmptyRegion("region has no boundary; the extension is vacuous")
    pts = [b.point for b in bd]
    dist = metric_distance_field(g, pts)
    if ell is None:
        ell = min(g.min_edge_length / 2, 0.25 * min(b - a for _, iv in R.items() for a, b in iv))
    inner = R.intersect(metric_superlevel(dist, ell))
    if inner.is_empty:
        raise EmptyRegion("no points at distance >= ell from the region boundary")
    band = R.intersect(inner.complement())
    # Boggio split: (1 - theta) (1/Upsilon - V') <= delta on the region
    worst = 0.0
    for eid, ivs in R.items():
        for a, b in ivs:
            s = np.linspace(a, b, 2049)
            worst = max(worst, float(np.max(1.0 / lf(eid, s) - np.asarray(lf.potential(eid, s)) - lf.shift)))
    one_minus_theta = min(1.0, delta / worst) if worst > 0 else 1.0
    norm = 1.0
    if eigenpair is not None:
        norm = eigenpair.norm_sq(band)
    w = SqrtDensityWeight(g, q)
    F = DistanceField(g, w, [b.point for b in inner.boundary()])
    K = norm / (ell ** 2 * one_minus_theta)

    def func(e, s):
        return np.sqrt(dist.along(e, s) * K) * np.exp(-F.along(e, s))

    prov = {"E": E, "shift": lf.shift, "delta": delta, "ell": ell, "band_norm_sq": norm,
            "one_minus_theta": one_minus_theta, "K": K}
    return Envelope("torsion-agmon", g, inner, func, prov)
