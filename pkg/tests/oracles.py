"""Independent reference computations used by several test modules."""

import itertools
import math
import random

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from qglandscape import build_graph
from qglandscape.potential import Constant, Cosine, PotentialField, Quadratic


def turning_points(f, a, b, n=2001):
    s = np.linspace(a, b, n)
    v = np.array([f(x) for x in s])
    out = []
    for i in range(n - 1):
        if v[i] == 0.0:
            out.append(s[i])
        elif v[i] * v[i + 1] < 0:
            out.append(brentq(f, s[i], s[i + 1], xtol=1e-15))
    return out


def quad_weight(V, E):
    """``w(e, a, b) = int_a^b sqrt((V - E)_+)`` by adaptive quadrature split at turning points."""

    def w(eid, a, b):
        if b < a:
            a, b = b, a
        if b == a:
            return 0.0
        f = lambda x: float(V(eid, np.array([x]))[0]) - E  # noqa: E731
        pts = [a] + [t for t in turning_points(f, a, b) if a < t < b] + [b]
        tot = 0.0
        for lo, hi in zip(pts[:-1], pts[1:]):
            tot += quad(lambda x: math.sqrt(max(f(x), 0.0)), lo, hi, epsabs=1e-14, epsrel=1e-13, limit=400)[0]
        return tot

    return w


def enumerate_distance(g, w, src, dst):
    """Minimum over every simple vertex path of the path weight; ``src``/``dst`` are (edge, s)."""
    full = {e.id: w(e.id, 0.0, e.length) for e in g.edges}
    best_vv = {}
    verts = list(g.vertices)
    for a in verts:
        for b in verts:
            best_vv[a, b] = 0.0 if a == b else math.inf
    adj = {v: [] for v in verts}
    for e in g.edges:
        adj[e.u].append((e.v, e.id))
        adj[e.v].append((e.u, e.id))

    def walk(start, v, seen, cost):
        if cost < best_vv[start, v]:
            best_vv[start, v] = cost
        for nxt, eid in adj[v]:
            if nxt not in seen:
                walk(start, nxt, seen | {nxt}, cost + full[eid])

    for a in verts:
        walk(a, a, {a}, 0.0)

    def exits(p):
        eid, s = p
        e = g.edge(eid)
        return [(e.u, w(eid, 0.0, s)), (e.v, w(eid, s, e.length))]

    out = math.inf
    for (va, ca), (vb, cb) in itertools.product(exits(src), exits(dst)):
        out = min(out, ca + best_vv[va, vb] + cb)
    if src[0] == dst[0]:
        out = min(out, w(src[0], min(src[1], dst[1]), max(src[1], dst[1])))
    return out


def random_graph(seed, max_edges=8):
    rng = random.Random(seed)
    nv = rng.randint(2, 5)
    verts = [f"v{i}" for i in range(nv)]
    edges = []
    for i in range(1, nv):
        edges.append((verts[rng.randrange(i)], verts[i]))
    while len(edges) < rng.randint(nv - 1, max_edges):
        edges.append((rng.choice(verts), rng.choice(verts)))
    spec, pots = [], {}
    for k, (u, v) in enumerate(edges):
        eid = f"e{k}"
        L = rng.uniform(0.3, 3.0)
        spec.append((eid, u, v, L))
        kind = rng.choice(["cosine", "quadratic", "constant"])
        if kind == "cosine":
            a = rng.uniform(0.0, 6.0)
            pots[eid] = Cosine(a + 1.0, -rng.uniform(0.0, a), rng.uniform(0.5, 4.0), rng.uniform(0, math.pi))
        elif kind == "quadratic":
            c1, c2 = rng.uniform(-1.0, 1.0), rng.uniform(0.5, 4.0)
            pots[eid] = Quadratic(rng.uniform(0.0, 3.0) + c1 * c1 / (4 * c2), c1, c2)
        else:
            pots[eid] = Constant(rng.uniform(0.0, 8.0))
    g = build_graph(verts, spec)
    V = PotentialField(pots)
    V.validate(g)
    E = rng.uniform(0.5, 6.0)
    pts = [(e.id, rng.uniform(0.0, e.length)) for e in rng.sample(list(g.edges), min(3, g.m))]
    return g, V, E, pts
