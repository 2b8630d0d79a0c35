"""Input checks shared by the estimators."""

from __future__ import annotations

from collections import defaultdict

import numpy as np

from .exceptions import BadParameters
from .graph import MetricGraph
from .potential import PotentialField
from .specfile import GraphSpec


def check_graph_input(graph, potential=None):
    """Accept a GraphSpec, a ``(graph, potential)`` pair, or a bare graph (``V = 0``)."""
    if isinstance(graph, GraphSpec):
        return graph.graph, graph.potential
    if isinstance(graph, tuple) and len(graph) == 2 and potential is None:
        graph, potential = graph
    if not isinstance(graph, MetricGraph):
        raise BadParameters(f"expected a MetricGraph or GraphSpec, got {type(graph).__name__}")
    potential = PotentialField({}) if potential is None else potential
    if not isinstance(potential, PotentialField):
        raise BadParameters(f"expected a PotentialField, got {type(potential).__name__}")
    potential.validate(graph)
    return graph, potential


def check_points(X, graph, tol=1e-12):
    """Group query points ``[(edge, s), ...]`` by edge.

    Returns ``{edge: (positions, s)}`` so results can be scattered back into
    input order.
    """
    groups = defaultdict(lambda: ([], []))
    for i, item in enumerate(X):
        try:
            eid, s = item
            s = float(s)
        except (TypeError, ValueError):
            raise BadParameters(f"point {i} is not an (edge, s) pair: {item!r}") from None
        if eid not in graph.edge_ids:
            raise BadParameters(f"point {i}: unknown edge {eid!r}")
        L = graph.length(eid)
        if not (-tol <= s <= L + tol) or not np.isfinite(s):
            raise BadParameters(f"point {i}: s = {s} outside [0, {L}]")
        groups[eid][0].append(i)
        groups[eid][1].append(min(max(s, 0.0), L))
    return {e: (np.array(ix), np.array(ss)) for e, (ix, ss) in groups.items()}, len(X)


def check_positive(name, value, allow_none=False):
    if value is None and allow_none:
        return value
    if value is None or not np.isfinite(value) or value <= 0:
        raise BadParameters(f"{name} must be a positive number, got {value!r}")
    return value
