"""Line-oriented graph-spec documents.

Grammar (UTF-8, ``#`` starts a comment, blank lines ignored)::

    [options]            optional; ``key = value`` lines
    l_min = 1e-06
    d_max = 64
    shift = 0.0          energy shift already applied to V

    [vertices]           one id per line
    o

    [edges]              ``id u v length``
    c o o 6.283185307179586

    [potential]          ``edge kind params...``; missing edges carry V = 0
    c cosine 20.0 20.0 2.0 0.0

Potential kinds: ``constant c``, ``cosine a b omega [phi]``,
``quadratic c0 [c1 [c2]]``, ``sampled v0 v1 ...`` (uniform grid over the edge).
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .exceptions import InputError, QuantumGraphError, SpecParseError
from .graph import D_MAX_DEFAULT, L_MIN_DEFAULT, MetricGraph
from .potential import PotentialField, parse_descriptor

SECTIONS = ("options", "vertices", "edges", "potential")
OPTION_TYPES = {"l_min": float, "d_max": int, "shift": float}


@dataclass
class GraphSpec:
    graph: MetricGraph
    potential: PotentialField
    options: dict = field(default_factory=dict)

    @property
    def shift(self):
        return float(self.options.get("shift", 0.0))


def _num(tok, line):
    try:
        return float(tok)
    except ValueError:
        raise SpecParseError(f"expected a number, got {tok!r}", line) from None


def parse_spec(text: str) -> GraphSpec:
    section = None
    options, vertices, edges, pots = {}, [], [], {}
    edge_line, pot_line = {}, {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line[1:-1].strip().lower() not in SECTIONS:
                raise SpecParseError(f"unknown section header {line!r}", no)
            section = line[1:-1].strip().lower()
            continue
        if section is None:
            raise SpecParseError("content before the first section header", no)
        toks = line.split()
        if section == "options":
            if "=" not in line:
                raise SpecParseError("options take the form 'key = value'", no)
            key, val = (x.strip() for x in line.split("=", 1))
            if key not in OPTION_TYPES:
                raise SpecParseError(f"unknown option {key!r}", no)
            try:
                options[key] = OPTION_TYPES[key](val)
            except ValueError:
                raise SpecParseError(f"bad value for {key}: {val!r}", no) from None
        elif section == "vertices":
            if len(toks) != 1:
                raise SpecParseError("one vertex id per line", no)
            if toks[0] in vertices:
                raise SpecParseError(f"duplicate vertex {toks[0]!r}", no)
            vertices.append(toks[0])
        elif section == "edges":
            if len(toks) != 4:
                raise SpecParseError("edge lines read 'id u v length'", no)
            eid, u, v, L = toks
            if eid in edge_line:
                raise SpecParseError(f"duplicate edge {eid!r}", no)
            for w in (u, v):
                if w not in vertices:
                    raise SpecParseError(f"edge {eid} references undeclared vertex {w!r}", no)
            edges.append((eid, u, v, _num(L, no)))
            edge_line[eid] = no
        else:
            if len(toks) < 2:
                raise SpecParseError("potential lines read 'edge kind params...'", no)
            eid = toks[0]
            if eid not in edge_line:
                raise SpecParseError(f"potential for undeclared edge {eid!r}", no)
            if eid in pots:
                raise SpecParseError(f"second potential for edge {eid!r}", no)
            for t in toks[2:]:
                _num(t, no)
            length = next(e[3] for e in edges if e[0] == eid)
            try:
                pots[eid] = parse_descriptor(toks[1:], length)
            except InputError as exc:
                raise SpecParseError(str(exc), no) from None
            pot_line[eid] = no
    if not vertices:
        raise SpecParseError("no [vertices] given", None)
    try:
        g = MetricGraph(vertices, edges, l_min=options.get("l_min", L_MIN_DEFAULT),
                        d_max=options.get("d_max", D_MAX_DEFAULT))
    except QuantumGraphError as exc:
        bad = next((edge_line[e] for e in edge_line if f"edge {e} " in str(exc)), None)
        if bad is not None:
            raise type(exc)(f"line {bad}: {exc}") from None
        raise
    V = PotentialField(pots)
    try:
        V.validate(g)
    except QuantumGraphError as exc:
        bad = next((pot_line[e] for e in pot_line if f" {e} " in f" {exc} " or f"{e} (" in str(exc)), None)
        if bad is not None:
            raise type(exc)(f"line {bad}: {exc}") from None
        raise
    return GraphSpec(g, V, options)


def dump_spec(spec: GraphSpec) -> str:
    out = []
    if spec.options:
        out.append("[options]")
        out += [f"{k} = {spec.options[k]!r}" for k in sorted(spec.options)]
        out.append("")
    out.append("[vertices]")
    out += list(spec.graph.vertices)
    out += ["", "[edges]"]
    out += [f"{e.id} {e.u} {e.v} {e.length!r}" for e in spec.graph.edges]
    out += ["", "[potential]"]
    for e in spec.graph.edges:
        if e.id in spec.potential.descriptors:
            out.append(" ".join([e.id] + spec.potential.descriptors[e.id].tokens()))
    return "\n".join(out) + "\n"


def load_spec(path) -> GraphSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_spec(fh.read())


def spec_hash(spec: GraphSpec) -> str:
    return hashlib.sha256(dump_spec(spec).encode("utf-8")).hexdigest()
