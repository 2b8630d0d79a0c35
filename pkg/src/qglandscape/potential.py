"""Per-edge potential descriptors and the graph-wide potential field.

Each descriptor is a function of the edge coordinate ``s`` in the edge's own
orientation. Closed forms report exact extrema on a subinterval, which the
region classifier and the bound constructors rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .exceptions import BadParameters, NegativePotential


class Descriptor:
    kind = "abstract"

    def __call__(self, s):
        raise NotImplementedError

    def derivative(self, s):
        raise NotImplementedError

    def extrema(self, a, b):
        """Return ``(min, max)`` of the descriptor on ``[a, b]``."""
        raise NotImplementedError

    def breakpoints(self, length):
        """Interior points where the descriptor is not smooth."""
        return np.empty(0)

    def tokens(self):
        raise NotImplementedError

    def shifted(self, c):
        raise NotImplementedError

    @property
    def is_constant(self):
        return False


@dataclass(frozen=True)
class Constant(Descriptor):
    c: float
    kind = "constant"

    def __call__(self, s):
        return np.full(np.shape(s), float(self.c)) if np.ndim(s) else float(self.c)

    def derivative(self, s):
        return np.zeros(np.shape(s)) if np.ndim(s) else 0.0

    def extrema(self, a, b):
        return float(self.c), float(self.c)

    def tokens(self):
        return ["constant", repr(float(self.c))]

    def shifted(self, c):
        return Constant(self.c + c)

    @property
    def is_constant(self):
        return True


@dataclass(frozen=True)
class Cosine(Descriptor):
    """``a + b cos(omega s + phi)``."""

    a: float
    b: float
    omega: float
    phi: float = 0.0
    kind = "cosine"

    def __call__(self, s):
        return self.a + self.b * np.cos(self.omega * np.asarray(s, dtype=float) + self.phi)

    def derivative(self, s):
        return -self.b * self.omega * np.sin(self.omega * np.asarray(s, dtype=float) + self.phi)

    def extrema(self, a, b):
        pts = [a, b]
        if self.omega != 0.0 and self.b != 0.0:
            w = self.omega
            lo, hi = sorted((w * a + self.phi, w * b + self.phi))
            k0 = math.ceil(lo / math.pi)
            k1 = math.floor(hi / math.pi)
            pts.extend((k * math.pi - self.phi) / w for k in range(k0, k1 + 1))
        vals = self(np.array(pts, dtype=float))
        return float(vals.min()), float(vals.max())

    def tokens(self):
        return ["cosine"] + [repr(float(x)) for x in (self.a, self.b, self.omega, self.phi)]

    def shifted(self, c):
        return Cosine(self.a + c, self.b, self.omega, self.phi)

    @property
    def is_constant(self):
        return self.b == 0.0 or self.omega == 0.0


@dataclass(frozen=True)
class Quadratic(Descriptor):
    """``c0 + c1 s + c2 s**2``."""

    c0: float
    c1: float = 0.0
    c2: float = 0.0
    kind = "quadratic"

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        return self.c0 + s * (self.c1 + self.c2 * s)

    def derivative(self, s):
        return self.c1 + 2.0 * self.c2 * np.asarray(s, dtype=float)

    def extrema(self, a, b):
        pts = [a, b]
        if self.c2 != 0.0:
            v = -self.c1 / (2.0 * self.c2)
            if a < v < b:
                pts.append(v)
        vals = self(np.array(pts, dtype=float))
        return float(vals.min()), float(vals.max())

    def tokens(self):
        return ["quadratic"] + [repr(float(x)) for x in (self.c0, self.c1, self.c2)]

    def shifted(self, c):
        return Quadratic(self.c0 + c, self.c1, self.c2)

    @property
    def is_constant(self):
        return self.c1 == 0.0 and self.c2 == 0.0


@dataclass(frozen=True, eq=False)
class Sampled(Descriptor):
    """Linear interpolation of values on a uniform grid spanning ``[0, length]``."""

    values: tuple
    length: float
    kind = "sampled"

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2:
            raise BadParameters("sampled potential needs at least two values")
        if not all(math.isfinite(v) for v in vals):
            raise BadParameters("sampled potential has non-finite values")
        object.__setattr__(self, "values", vals)

    def __eq__(self, other):
        return isinstance(other, Sampled) and self.values == other.values and self.length == other.length

    def __hash__(self):
        return hash((self.values, self.length))

    @property
    def grid(self):
        return np.linspace(0.0, self.length, len(self.values))

    def __call__(self, s):
        return np.interp(s, self.grid, np.asarray(self.values))

    def derivative(self, s):
        g = self.grid
        slopes = np.diff(self.values) / np.diff(g)
        idx = np.clip(np.searchsorted(g, s, side="right") - 1, 0, len(slopes) - 1)
        return slopes[idx]

    def extrema(self, a, b):
        g = self.grid
        inside = (g > a) & (g < b)
        vals = np.concatenate([np.asarray(self.values)[inside], [self(a), self(b)]])
        return float(vals.min()), float(vals.max())

    def breakpoints(self, length):
        return self.grid[1:-1].copy()

    def tokens(self):
        return ["sampled"] + [repr(v) for v in self.values]

    def shifted(self, c):
        return Sampled(tuple(v + c for v in self.values), self.length)

    @property
    def is_constant(self):
        return len(set(self.values)) == 1


def parse_descriptor(tokens, length):
    """Build a descriptor from whitespace-split spec tokens."""
    if not tokens:
        raise BadParameters("empty potential descriptor")
    kind, args = tokens[0].lower(), [float(t) for t in tokens[1:]]
    arity = {"constant": (1, 1), "cosine": (3, 4), "quadratic": (1, 3)}
    if kind == "sampled":
        return Sampled(tuple(args), float(length))
    if kind not in arity:
        raise BadParameters(f"unknown potential kind {tokens[0]!r}")
    lo, hi = arity[kind]
    if not lo <= len(args) <= hi:
        raise BadParameters(f"{kind} takes {lo}..{hi} parameters, got {len(args)}")
    return {"constant": Constant, "cosine": Cosine, "quadratic": Quadratic}[kind](*args)


@dataclass(frozen=True)
class PotentialField:
    """Mapping from edge id to descriptor. Missing edges carry ``V = 0``."""

    descriptors: Mapping[str, Descriptor] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "descriptors", dict(self.descriptors))

    def on(self, edge) -> Descriptor:
        return self.descriptors.get(edge, Constant(0.0))

    def __call__(self, edge, s):
        return self.on(edge)(s)

    def derivative(self, edge, s):
        return self.on(edge).derivative(s)

    def extrema(self, graph, edge=None, a=None, b=None):
        edges = [edge] if edge is not None else [e.id for e in graph.edges]
        lo, hi = math.inf, -math.inf
        for eid in edges:
            L = graph.length(eid)
            x0 = 0.0 if a is None else a
            x1 = L if b is None else b
            m, M = self.on(eid).extrema(x0, x1)
            lo, hi = min(lo, m), max(hi, M)
        return lo, hi

    def minimum(self, graph):
        return self.extrema(graph)[0]

    def maximum(self, graph):
        return self.extrema(graph)[1]

    def shifted(self, graph, c):
        return PotentialField({e.id: self.on(e.id).shifted(c) for e in graph.edges})

    def validate(self, graph, tol=0.0):
        for e in graph.edges:
            d = self.on(e.id)
            if isinstance(d, Sampled) and abs(d.length - e.length) > 1e-12 * max(1.0, e.length):
                raise BadParameters(f"sampled potential on {e.id} spans {d.length}, edge has {e.length}")
            m, _ = d.extrema(0.0, e.length)
            if m < -tol:
                raise NegativePotential(f"V < 0 on edge {e.id} (min {m:.6g}); shift V and E together")
        unknown = set(self.descriptors) - {e.id for e in graph.edges}
        if unknown:
            raise BadParameters(f"potential given for unknown edges {sorted(unknown)}")
        return self
