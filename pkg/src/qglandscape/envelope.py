"""The envelope type: a certified pointwise upper bound on a validity region."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .exceptions import PointTooCloseToBoundary
from .graph import GraphPoint, MetricGraph
from .regions import Region

METHODS = ("agmon", "agmon-interval", "agmon-delta", "torsion", "torsion-agmon", "davies",
           "oscillation", "gronwall", "window", "uniform")


@dataclass(frozen=True)
class Envelope:
    method: str
    graph: MetricGraph
    validity: Region
    func: Callable = field(repr=False)
    provenance: dict = field(default_factory=dict)
    outside_error: type = PointTooCloseToBoundary

    def __call__(self, edge, s):
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, np.nan)
        mask = self.validity.contains(edge, s)
        if np.any(mask):
            out[mask] = np.asarray(self.func(edge, s[mask]), dtype=float)
        return out

    def at(self, p: GraphPoint):
        v = float(self(p.edge, np.array([p.s]))[0])
        if np.isnan(v):
            raise self.outside_error(f"{p} lies outside the validity region of the {self.method} envelope")
        return v

    def sample(self, n=512):
        """``{edge: (s, values)}`` with ``n`` points on each valid interval."""
        out = {}
        for eid, iv in self.validity.items():
            s = np.concatenate([np.linspace(a, b, n) for a, b in iv])
            out[eid] = (s, np.asarray(self.func(eid, s), dtype=float))
        return out

    def scaled(self, c):
        f = self.func
        return replace(self, func=lambda e, s: c * np.asarray(f(e, s)),
                       provenance={**self.provenance, "scaled_by": c})

    def restricted(self, region: Region):
        return replace(self, validity=self.validity.intersect(region))


def pointwise_min(envelopes, method="auto"):
    """Minimum of several envelopes on the union of their validity regions."""
    envelopes = list(envelopes)
    g = envelopes[0].graph
    region = envelopes[0].validity
    for env in envelopes[1:]:
        region = region.union(env.validity)

    def func(edge, s):
        vals = np.vstack([env(edge, s) for env in envelopes])
        return np.nanmin(vals, axis=0)

    return Envelope(method, g, region, func, {"members": [e.method for e in envelopes]})
