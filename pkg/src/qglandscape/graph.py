"""Metric graphs, points on them, paths, and weighted shortest paths."""

from __future__ import annotations

import heapq
import math
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .exceptions import (
    BadParameters,
    DegreeTooLarge,
    DisconnectedGraph,
    EdgeTooShort,
    Unreachable,
)

L_MIN_DEFAULT = 1e-6
D_MAX_DEFAULT = 64


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: float

    @property
    def is_loop(self):
        return self.u == self.v


@dataclass(frozen=True, eq=False)
class GraphPoint:
    """A point ``s`` on edge ``edge``. Vertex points carry the vertex id and
    compare equal regardless of the incident edge used to name them."""

    edge: str
    s: float
    vertex: str | None = None

    def _key(self):
        return ("v", self.vertex) if self.vertex is not None else ("e", self.edge, float(self.s))

    def __eq__(self, other):
        return isinstance(other, GraphPoint) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        tail = f", vertex={self.vertex!r}" if self.vertex is not None else ""
        return f"GraphPoint({self.edge!r}, {self.s!r}{tail})"


@dataclass(frozen=True)
class PathSegment:
    edge: str
    orientation: int  # +1 when traversed with increasing s
    entry: float
    exit: float

    @property
    def length(self):
        return abs(self.exit - self.entry)


@dataclass(frozen=True)
class GraphPath:
    segments: tuple = ()

    @property
    def length(self):
        return float(sum(seg.length for seg in self.segments))

    def weight(self, w):
        return float(sum(w(seg.edge, min(seg.entry, seg.exit), max(seg.entry, seg.exit)) for seg in self.segments))


class MetricGraph:
    """Immutable metric graph. Loops and multi-edges are allowed."""

    def __init__(self, vertices: Sequence[str], edges: Iterable, *, l_min=L_MIN_DEFAULT,
                 d_max=D_MAX_DEFAULT, require_connected=True):
        self.l_min = float(l_min)
        self.d_max = int(d_max)
        self._vertices = tuple(str(v) for v in vertices)
        if len(set(self._vertices)) != len(self._vertices):
            raise BadParameters("duplicate vertex ids")
        vset = set(self._vertices)
        es = []
        for item in edges:
            e = item if isinstance(item, Edge) else Edge(str(item[0]), str(item[1]), str(item[2]), float(item[3]))
            if e.u not in vset or e.v not in vset:
                raise BadParameters(f"edge {e.id} references unknown vertex")
            if not math.isfinite(e.length) or e.length <= 0:
                raise EdgeTooShort(f"edge {e.id} has non-positive or infinite length {e.length}")
            if e.length < self.l_min:
                raise EdgeTooShort(f"edge {e.id} has length {e.length:g} < L_min = {self.l_min:g}")
            es.append(Edge(e.id, e.u, e.v, float(e.length)))
        self._edges = tuple(es)
        self._by_id = {e.id: e for e in es}
        if len(self._by_id) != len(es):
            raise BadParameters("duplicate edge ids")
        inc = defaultdict(list)
        for e in es:
            inc[e.u].append((e.id, 0))
            inc[e.v].append((e.id, 1))
        self._incident = {v: tuple(inc[v]) for v in self._vertices}
        for v in self._vertices:
            if len(self._incident[v]) > self.d_max:
                raise DegreeTooLarge(f"vertex {v} has degree {len(self._incident[v])} > d_max = {self.d_max}")
        if not self._vertices:
            raise BadParameters("graph has no vertices")
        if require_connected and not self._connected():
            raise DisconnectedGraph("graph is not connected")

    def _connected(self):
        seen = {self._vertices[0]}
        queue = deque(seen)
        while queue:
            v = queue.popleft()
            for eid, end in self._incident[v]:
                e = self._by_id[eid]
                w = e.v if end == 0 else e.u
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self._vertices)

    @property
    def vertices(self):
        return self._vertices

    @property
    def edges(self):
        return self._edges

    @property
    def edge_ids(self):
        return tuple(e.id for e in self._edges)

    @property
    def m(self):
        return len(self._edges)

    @property
    def total_length(self):
        return float(sum(e.length for e in self._edges))

    @property
    def min_edge_length(self):
        return min(e.length for e in self._edges)

    def edge(self, eid) -> Edge:
        try:
            return self._by_id[eid]
        except KeyError:
            raise BadParameters(f"unknown edge {eid!r}") from None

    def length(self, eid):
        return self.edge(eid).length

    def incident(self, v):
        """Incident edge ends ``(edge_id, end)``; ``end`` is 0 at the start of the edge."""
        return self._incident[v]

    def degree(self, v):
        return len(self._incident[v])

    def leaves(self):
        return [v for v in self._vertices if self.degree(v) == 1]

    def endpoint(self, eid, end):
        e = self.edge(eid)
        return e.u if end == 0 else e.v

    def point(self, eid, s, tol=0.0):
        """Canonical point; coordinates within ``tol`` of an end snap to the vertex."""
        e = self.edge(eid)
        s = float(s)
        if s < -tol or s > e.length + tol:
            raise BadParameters(f"s = {s} outside edge {eid} of length {e.length}")
        if s <= tol:
            return GraphPoint(eid, 0.0, e.u)
        if s >= e.length - tol:
            return GraphPoint(eid, e.length, e.v)
        return GraphPoint(eid, s)

    def vertex_point(self, v):
        eid, end = self._incident[v][0]
        return GraphPoint(eid, 0.0 if end == 0 else self.length(eid), v)

    def outgoing(self, eid, end):
        """Direction (+1/-1 in s) pointing into the edge from the given end."""
        return 1 if end == 0 else -1

    def __repr__(self):
        return f"MetricGraph(|V|={len(self._vertices)}, m={self.m}, |G|={self.total_length:.6g})"

    def __eq__(self, other):
        return (isinstance(other, MetricGraph) and self._vertices == other._vertices
                and self._edges == other._edges)

    def __hash__(self):
        return hash((self._vertices, self._edges))


def build_graph(vertices, edges, *, l_min=L_MIN_DEFAULT, d_max=D_MAX_DEFAULT):
    """Validated graph from vertex ids and ``(id, u, v, length)`` tuples."""
    return MetricGraph(vertices, edges, l_min=l_min, d_max=d_max)


def double_leaves(g: MetricGraph) -> MetricGraph:
    """Glue two copies of ``g`` at its degree-one vertices."""
    leaves = set(g.leaves())
    if not leaves:
        return g

    def twin(v):
        return v if v in leaves else f"{v}'"

    verts = list(g.vertices) + [twin(v) for v in g.vertices if v not in leaves]
    edges = [(e.id, e.u, e.v, e.length) for e in g.edges]
    edges += [(f"{e.id}'", twin(e.u), twin(e.v), e.length) for e in g.edges]
    return MetricGraph(verts, edges, l_min=g.l_min, d_max=g.d_max)


# --------------------------------------------------------------------------
# weighted distances

def metric_weight(edge, a, b):
    return abs(b - a)


class DistanceField:
    """Single-source-set Dijkstra over vertices with virtual mid-edge sources.

    ``weight(edge, a, b)`` must return the integral of a nonnegative density
    over ``[a, b]`` on ``edge`` (``a <= b``).
    """

    def __init__(self, graph: MetricGraph, weight: Callable, sources: Sequence[GraphPoint]):
        if not sources:
            raise BadParameters("empty source set")
        self.graph = graph
        self.weight = weight
        self.sources = tuple(sources)
        self._full = {e.id: float(weight(e.id, 0.0, e.length)) for e in graph.edges}
        self._on_edge = defaultdict(list)
        for p in self.sources:
            if p.vertex is None:
                self._on_edge[p.edge].append(float(p.s))
        self.dist = {v: math.inf for v in graph.vertices}
        self.pred = {}
        self._run()

    def _run(self):
        g = self.graph
        heap = []
        counter = 0

        def push(d, v, how):
            nonlocal counter
            heapq.heappush(heap, (d, counter, v, how))
            counter += 1

        for p in self.sources:
            if p.vertex is not None:
                push(0.0, p.vertex, ("source", p))
            else:
                e = g.edge(p.edge)
                push(float(self.weight(e.id, 0.0, p.s)), e.u, ("partial", e.id, p.s, -1))
                push(float(self.weight(e.id, p.s, e.length)), e.v, ("partial", e.id, p.s, +1))
        done = set()
        while heap:
            d, _, v, how = heapq.heappop(heap)
            if v in done:
                continue
            done.add(v)
            self.dist[v] = d
            self.pred[v] = how
            for eid, end in g.incident(v):
                e = g.edge(eid)
                w = e.v if end == 0 else e.u
                if w not in done:
                    push(d + self._full[eid], w, ("edge", eid, v, 1 if end == 0 else -1))

    def _candidates(self, eid, t):
        e = self.graph.edge(eid)
        yield self.dist[e.u] + float(self.weight(eid, 0.0, t)), ("from_u",)
        yield self.dist[e.v] + float(self.weight(eid, t, e.length)), ("from_v",)
        for s in self._on_edge.get(eid, ()):
            yield float(self.weight(eid, min(s, t), max(s, t))), ("direct", s)

    def at(self, p: GraphPoint) -> float:
        if p.vertex is not None:
            return self.dist[p.vertex]
        return min(c for c, _ in self._candidates(p.edge, p.s))

    def along(self, eid, s):
        """Vectorized distance along an edge (vertex-independent formula)."""
        s = np.asarray(s, dtype=float)
        e = self.graph.edge(eid)
        cum = getattr(self.weight, "cumulative", None)
        if cum is not None:
            c = cum(eid, s)
            best = np.minimum(self.dist[e.u] + c, self.dist[e.v] + (self._full[eid] - c))
            for s0 in self._on_edge.get(eid, ()):
                c0 = float(cum(eid, np.array([s0]))[0])
                best = np.minimum(best, np.abs(c - c0))
            return best
        out = np.array([min(c for c, _ in self._candidates(eid, float(t))) for t in s.ravel()])
        return out.reshape(s.shape)

    def endpoint_values(self, eid):
        e = self.graph.edge(eid)
        return self.dist[e.u], self.dist[e.v], tuple(self._on_edge.get(eid, ()))

    def _path_to_vertex(self, v):
        segs = []
        g = self.graph
        while True:
            if not math.isfinite(self.dist[v]):
                raise Unreachable(f"vertex {v} unreachable")
            how = self.pred[v]
            if how[0] == "source":
                break
            if how[0] == "partial":
                _, eid, s, direction = how
                end = 0.0 if direction < 0 else g.length(eid)
                segs.append(PathSegment(eid, direction, s, end))
                break
            _, eid, prev, direction = how
            L = g.length(eid)
            segs.append(PathSegment(eid, direction, 0.0 if direction > 0 else L, L if direction > 0 else 0.0))
            v = prev
        return list(reversed(segs))

    def path_to(self, p: GraphPoint) -> GraphPath:
        if p.vertex is not None:
            return GraphPath(tuple(self._path_to_vertex(p.vertex)))
        best, how = min(self._candidates(p.edge, p.s), key=lambda c: c[0])
        if not math.isfinite(best):
            raise Unreachable(f"{p} unreachable")
        e = self.graph.edge(p.edge)
        if how[0] == "direct":
            s0 = how[1]
            return GraphPath((PathSegment(e.id, 1 if p.s >= s0 else -1, s0, p.s),))
        if how[0] == "from_u":
            return GraphPath(tuple(self._path_to_vertex(e.u) + [PathSegment(e.id, 1, 0.0, p.s)]))
        return GraphPath(tuple(self._path_to_vertex(e.v) + [PathSegment(e.id, -1, e.length, p.s)]))


def shortest_path(g: MetricGraph, w: Callable, sources: Sequence[GraphPoint], target: GraphPoint):
    """Minimal weight from a source set to ``target`` and one realizing path."""
    field_ = DistanceField(g, w, list(sources))
    d = field_.at(target)
    if not math.isfinite(d):
        raise Unreachable(f"{target} unreachable")
    return d, field_.path_to(target)
