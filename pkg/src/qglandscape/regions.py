"""Subsets of a metric graph as per-edge unions of closed intervals."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .graph import GraphPoint, MetricGraph

SNAP = 1e-12


def _merge(intervals, length, min_len=0.0):
    out = []
    for a, b in sorted(intervals):
        a, b = max(0.0, float(a)), min(length, float(b))
        if a <= SNAP * max(1.0, length):
            a = 0.0
        if b >= length - SNAP * max(1.0, length):
            b = length
        if b - a <= min_len:
            continue
        if out and a <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], b))
        else:
            out.append((a, b))
    return out


@dataclass(frozen=True)
class BoundaryPoint:
    point: GraphPoint
    outward: tuple  # (edge, direction) pairs leaving the region


class Region:
    """Closed subset of the graph; zero-length pieces are dropped."""

    def __init__(self, graph: MetricGraph, intervals=None):
        self.graph = graph
        self._iv = {}
        for e in graph.edges:
            self._iv[e.id] = tuple(_merge((intervals or {}).get(e.id, ()), e.length))

    @classmethod
    def full(cls, graph):
        return cls(graph, {e.id: [(0.0, e.length)] for e in graph.edges})

    @classmethod
    def empty(cls, graph):
        return cls(graph, {})

    def intervals(self, edge):
        return self._iv[edge]

    def items(self):
        return [(eid, iv) for eid, iv in self._iv.items() if iv]

    @property
    def is_empty(self):
        return not any(self._iv.values())

    @property
    def measure(self):
        return float(sum(b - a for iv in self._iv.values() for a, b in iv))

    def contains(self, edge, s, tol=1e-12):
        s = np.asarray(s, dtype=float)
        out = np.zeros(s.shape, dtype=bool)
        for a, b in self._iv[edge]:
            out |= (s >= a - tol) & (s <= b + tol)
        return out

    def covers_end(self, edge, end):
        iv = self._iv[edge]
        if not iv:
            return False
        return iv[0][0] == 0.0 if end == 0 else iv[-1][1] == self.graph.length(edge)

    def complement(self):
        out = {}
        for e in self.graph.edges:
            pts = [0.0]
            for a, b in self._iv[e.id]:
                pts += [a, b]
            pts.append(e.length)
            out[e.id] = [(pts[i], pts[i + 1]) for i in range(0, len(pts), 2)]
        return Region(self.graph, out)

    def intersect(self, other):
        out = {}
        for e in self.graph.edges:
            res = []
            for a, b in self._iv[e.id]:
                for c, d in other._iv[e.id]:
                    lo, hi = max(a, c), min(b, d)
                    if hi > lo:
                        res.append((lo, hi))
            out[e.id] = res
        return Region(self.graph, out)

    def union(self, other):
        return Region(self.graph, {e.id: list(self._iv[e.id]) + list(other._iv[e.id]) for e in self.graph.edges})

    def vertices_inside(self):
        return [v for v in self.graph.vertices
                if all(self.covers_end(eid, end) for eid, end in self.graph.incident(v))]

    def boundary(self):
        g = self.graph
        pts = []
        for v in g.vertices:
            inc = g.incident(v)
            cov = [self.covers_end(eid, end) for eid, end in inc]
            if any(cov) and not all(cov):
                out = tuple((eid, g.outgoing(eid, end)) for (eid, end), c in zip(inc, cov) if not c)
                pts.append(BoundaryPoint(g.vertex_point(v), out))
        for e in g.edges:
            for a, b in self._iv[e.id]:
                if a > 0.0:
                    pts.append(BoundaryPoint(GraphPoint(e.id, a), ((e.id, -1),)))
                if b < e.length:
                    pts.append(BoundaryPoint(GraphPoint(e.id, b), ((e.id, 1),)))
        return pts

    def components(self):
        g = self.graph
        nodes = [(eid, i) for eid, iv in self._iv.items() for i in range(len(iv))]
        parent = {n: n for n in nodes}

        def find(n):
            while parent[n] != n:
                parent[n] = parent[parent[n]]
                n = parent[n]
            return n

        for v in g.vertices:
            touching = []
            for eid, end in g.incident(v):
                if self.covers_end(eid, end):
                    touching.append((eid, 0 if end == 0 else len(self._iv[eid]) - 1))
            for n in touching[1:]:
                parent[find(n)] = find(touching[0])
        groups = defaultdict(dict)
        for eid, i in nodes:
            groups[find((eid, i))].setdefault(eid, []).append(self._iv[eid][i])
        return [Region(g, iv) for iv in groups.values()]

    def __repr__(self):
        return f"Region({ {k: v for k, v in self._iv.items() if v} })"


def positive_intervals(f: Callable, length, *, n_scan=512, breakpoints=(), ztol=0.0, iters=80):
    """Closed intervals of ``[0, length]`` where ``f > ztol``.

    Transitions are located by bisection on the predicate after a scan, which
    handles smooth crossings and jumps alike.
    """
    grid = np.unique(np.concatenate([np.linspace(0.0, length, n_scan + 1), np.asarray(breakpoints, float)]))
    pos = np.asarray(f(grid)) > ztol
    out = []
    start = 0.0 if pos[0] else None

    def locate(a, b, left_pos):
        for _ in range(iters):
            mid = 0.5 * (a + b)
            if mid in (a, b):
                break
            if (f(np.array([mid]))[0] > ztol) == left_pos:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    for i in range(len(grid) - 1):
        if pos[i] != pos[i + 1]:
            r = locate(grid[i], grid[i + 1], pos[i])
            if pos[i + 1]:
                start = r
            else:
                out.append((start, r))
                start = None
    if start is not None:
        out.append((start, length))
    return out


@dataclass(frozen=True)
class RegionPartition:
    energy: float
    tunneling: Region
    allowed: Region
    boundary: tuple
    tol: float
    low_energy: Region | None = None

    @property
    def graph(self):
        return self.tunneling.graph


def scan_resolution(length, h=None):
    n = 512
    if h is not None:
        n = max(n, int(np.ceil(length / h)))
    return n


def classify_regions(g: MetricGraph, V, E, tol=None, *, low_energy=None, n_scan=None):
    """Split the graph into the tunneling set ``V > E`` and its complement."""
    E = float(E)
    if tol is None:
        tol = 1e-10 * max(1.0, abs(E))
    tun = {}
    for e in g.edges:
        d = V.on(e.id)
        if d.is_constant:
            c = float(d(0.0))
            tun[e.id] = [(0.0, e.length)] if c - E > tol else []
            continue
        tun[e.id] = positive_intervals(lambda s, d=d: d(s) - E, e.length,
                                       n_scan=n_scan or scan_resolution(e.length),
                                       breakpoints=d.breakpoints(e.length), ztol=tol)
    T = Region(g, tun)
    C = T.complement()
    low = None
    if low_energy is not None:
        low = classify_regions(g, V, low_energy, tol, n_scan=n_scan).allowed
    return RegionPartition(E, T, C, tuple(T.boundary()), tol, low)
