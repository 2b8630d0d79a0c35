"""On-disk formats: eigen archives, envelope CSVs, manifests. All writes are atomic."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from collections import defaultdict

import numpy as np

from .exceptions import BadParameters, GridMismatch
from .spectral import Eigenpair
from .specfile import dump_spec, load_spec

EIGENVALUES = "eigenvalues.csv"
EIGENFUNCTIONS = "eigenfunctions.csv"
SPEC = "graph.qg"
MANIFEST = "manifest.json"
ENVELOPE_HEADER = ("edge", "s", "value", "method")
_UMASK = os.umask(0)
os.umask(_UMASK)


def atomic_write(path, text):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.chmod(tmp, 0o666 & ~_UMASK)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    return buf.getvalue()


def write_manifest(path, data):
    atomic_write(path, json.dumps(data, indent=2, sort_keys=True, default=_jsonable) + "\n")


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(x)
    return repr(x)


# --------------------------------------------------------------------------
# eigen archives

def save_eigen_archive(directory, spec, pairs):
    rows = [(p.index, p.energy, p.discrete_energy, p.residual, p.h) for p in pairs]
    atomic_write(os.path.join(directory, EIGENVALUES),
                 _csv(("index", "energy", "discrete_energy", "residual", "h"), rows))
    frows = []
    for p in pairs:
        for e in spec.graph.edges:
            s, u, du = p.samples[e.id]
            frows += [(p.index, e.id, float(a), float(b), float(c)) for a, b, c in zip(s, u, du)]
    atomic_write(os.path.join(directory, EIGENFUNCTIONS),
                 _csv(("index", "edge", "s", "value", "derivative"), frows))
    atomic_write(os.path.join(directory, SPEC), dump_spec(spec))
    return [EIGENVALUES, EIGENFUNCTIONS, SPEC]


def load_eigen_archive(directory):
    spec = load_spec(os.path.join(directory, SPEC))
    meta = {}
    with open(os.path.join(directory, EIGENVALUES), encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            meta[int(r["index"])] = r
    data = defaultdict(lambda: defaultdict(list))
    with open(os.path.join(directory, EIGENFUNCTIONS), encoding="utf-8") as fh:
        for r in csv.DictReader(fh):
            data[int(r["index"])][r["edge"]].append((float(r["s"]), float(r["value"]), float(r["derivative"])))
    pairs = []
    for idx in sorted(meta):
        r = meta[idx]
        samples = {}
        for e in spec.graph.edges:
            if e.id not in data[idx]:
                raise GridMismatch(f"eigenfunction {idx} has no samples on edge {e.id}")
            arr = np.array(data[idx][e.id])
            samples[e.id] = (arr[:, 0], arr[:, 1], arr[:, 2])
        pairs.append(Eigenpair(float(r["energy"]), float(r["discrete_energy"]), idx, spec.graph, spec.potential,
                               samples, float(r["residual"]), float(r["h"])))
    return spec, pairs


# --------------------------------------------------------------------------
# envelopes

def envelope_rows(labelled, n):
    """Rows ``(edge, s, value, method)`` from ``[(label, envelope)]``."""
    rows = []
    for label, env in labelled:
        for eid, (s, vals) in env.sample(n).items():
            rows += [(eid, float(a), float(b), label) for a, b in zip(s, vals)]
    return rows


def write_envelope_csv(path, rows):
    atomic_write(path, _csv(ENVELOPE_HEADER, rows))


def read_envelope_csv(path, graph=None, tol=1e-9):
    out = defaultdict(lambda: ([], [], []))
    with open(path, encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header[:3]) != ENVELOPE_HEADER[:3]:
            raise BadParameters(f"{path}: envelope CSV must start with header edge,s,value")
        for row in reader:
            eid, s, v = row[0], float(row[1]), float(row[2])
            m = row[3] if len(row) > 3 else ""
            if graph is not None:
                if eid not in graph.edge_ids:
                    raise GridMismatch(f"{path}: unknown edge {eid!r}")
                L = graph.length(eid)
                if s < -tol * max(1.0, L) or s > L * (1 + tol) + tol:
                    raise GridMismatch(f"{path}: s = {s} outside edge {eid} of length {L}")
            out[eid][0].append(s)
            out[eid][1].append(v)
            out[eid][2].append(m)
    return {e: (np.array(a), np.array(b), list(c)) for e, (a, b, c) in out.items()}
