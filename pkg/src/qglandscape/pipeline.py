"""Method dispatch shared by the CLI and the estimators."""

from __future__ import annotations

import math

import numpy as np

from .agmon import auto_delta_cuts, delta_envelope, tunneling_envelope
from .envelope import pointwise_min
from .exceptions import (
    BadParameters,
    CollarError,
    InputError,
    MethodInapplicable,
    NumericalFailure,
    ShiftNotBelowE,
    SubintervalTooShort,
)
from .local import (
    auto_oscillation_subinterval,
    auto_windows,
    davies_envelope,
    gronwall_envelope,
    oscillation_envelope,
    window_envelope,
)
from .regions import Region
from .torsion import build_landscape, max_principle_envelope, torsion_agmon_extension
from .uniform import uniform_bound, uniform_envelope
from .verify import FAMILIES, select_regime

CLI_METHODS = ("auto", "agmon", "agmon-delta", "torsion", "torsion-agmon", "davies", "oscillation", "window",
               "gronwall", "uniform")
NEEDS_PSI = ("davies", "oscillation", "gronwall")


def _need(eigenpair, method):
    if eigenpair is None:
        raise BadParameters(f"method {method} needs an eigenpair")


def _per_edge(g, build):
    out = []
    for e in g.edges:
        try:
            out.append(build(e))
        except (ShiftNotBelowE, SubintervalTooShort, CollarError):
            continue
    return out


def envelopes_for(method, g, V, E, eigenpair=None, *, shift=0.0, ell=None, delta=None, E_m=None, tau=None):
    """Envelopes of one family; ``MethodInapplicable`` when none can be built."""
    E = float(E)
    if method == "uniform":
        return [uniform_envelope(g, E, V.minimum(g))]
    if method == "agmon":
        try:
            return [tunneling_envelope(g, V, E, ell=ell, eigenpair=eigenpair)]
        except InputError as exc:
            raise MethodInapplicable(f"agmon: {exc}") from None
    if method == "agmon-delta":
        d = 0.25 * (V.maximum(g) - E) if delta is None else float(delta)
        if not d > 0:
            raise MethodInapplicable("agmon-delta: no barrier above E")
        out, k = [], 0
        while True:
            try:
                cuts = auto_delta_cuts(g, V, E, d, component=k)
            except IndexError:
                break
            except InputError as exc:
                if k == 0:
                    raise MethodInapplicable(f"agmon-delta: {exc}") from None
                break
            try:
                out.append(delta_envelope(g, V, E, d, cuts, eigenpair))
            except InputError:
                pass
            k += 1
        if not out:
            raise MethodInapplicable("agmon-delta: no separated component")
        return out
    if method in ("torsion", "torsion-agmon"):
        try:
            lf = build_landscape(g, V, shift=shift)
        except (InputError, NumericalFailure) as exc:
            raise MethodInapplicable(f"{method}: {exc}") from None
        if method == "torsion":
            psi_sup = eigenpair.sup_norm() if eigenpair is not None else uniform_bound(g, E, V.minimum(g))
            return [max_principle_envelope(lf, E, psi_sup, eigenpair=eigenpair)]
        if delta is None:
            top = max(float(np.max(1.0 / lf(e.id, np.linspace(0, e.length, 1025)))) for e in g.edges)
            delta = 0.5 * (top - E - shift)
            if not delta > 0:
                raise MethodInapplicable(f"torsion-agmon: 1/Upsilon never exceeds E + shift = {E + shift:g}")
        try:
            return [torsion_agmon_extension(lf, E, delta, eigenpair=eigenpair, ell=ell)]
        except InputError as exc:
            raise MethodInapplicable(f"torsion-agmon: {exc}") from None
    if method == "davies":
        _need(eigenpair, method)
        out = _per_edge(g, lambda e: davies_envelope(eigenpair, e.id, E_m=E_m))
    elif method == "oscillation":
        _need(eigenpair, method)

        def one(e):
            em = V.on(e.id).extrema(0.0, e.length)[0] if E_m is None else E_m
            sub = auto_oscillation_subinterval(V, E, g, e.id)
            return oscillation_envelope(V, E, em, g, e.id, sub, eigenpair=eigenpair)

        out = _per_edge(g, one)
    elif method == "window":
        out = []
        for w in auto_windows(g, V, E, tau):
            try:
                out.append(window_envelope(g, V, E, w, ell=ell, eigenpair=eigenpair))
            except CollarError:
                continue
    elif method == "gronwall":
        _need(eigenpair, method)

        def one(e):
            x0 = 0.5 * e.length
            p0 = float(eigenpair.values(e.id, np.array([x0]))[0])
            d0 = float(eigenpair.derivatives(e.id, np.array([x0]))[0])
            return gronwall_envelope(p0, d0, V, E, g, e.id, x0)

        out = _per_edge(g, one)
    else:
        raise BadParameters(f"unknown method {method!r}; choose from {', '.join(CLI_METHODS)}")
    if not out:
        raise MethodInapplicable(f"{method}: no edge or window admits this bound at E = {E:g}")
    return out


def auto_envelopes(g, V, E, eigenpair=None, *, shift=0.0, n=512, thresholds=None, **kw):
    """Per-regime choice among applicable families.

    Returns ``[(label, envelope)]`` where each envelope is restricted to its
    regime region and equals the pointwise minimum of the applicable family
    members there; regions no family covers fall back to the uniform bound.
    """
    rm = select_regime(g, V, E, n=n, **(thresholds or {}))
    cache = {}

    def family(name):
        if name not in cache:
            try:
                cache[name] = envelopes_for(name, g, V, E, eigenpair, shift=shift, **kw)
            except (InputError, NumericalFailure):
                cache[name] = []
        return cache[name]

    out = []
    for label, region, fams in rm.plan(g):
        members = [(name, env) for name in fams for env in family(name)]
        covered = Region.empty(g)
        for name, env in members:
            piece = env.restricted(region)
            if not piece.validity.is_empty:
                out.append((f"{label}:{name}", piece))
                covered = covered.union(piece.validity)
        rest = region.intersect(covered.complement())
        fallback = family("uniform")
        if fallback and rest.measure > 1e-12:
            out.append((f"{label}:uniform", fallback[0].restricted(rest)))
    return out


def stitch(labelled, g, n=512):
    """Rows ``(edge, s, value, method)``: minimum over the labelled envelopes on a common grid."""
    rows = []
    for e in g.edges:
        s = np.linspace(0.0, e.length, n)
        best = np.full(n, np.inf)
        which = np.full(n, "", dtype=object)
        for label, env in labelled:
            v = env(e.id, s)
            ok = np.isfinite(v) & (v < best)
            best[ok], which[ok] = v[ok], label
        rows += [(e.id, float(a), float(b), str(m)) for a, b, m in zip(s, best, which) if math.isfinite(b)]
    return rows


def combined(envs, method):
    return envs[0] if len(envs) == 1 else pointwise_min(envs, method)


__all__ = ["CLI_METHODS", "FAMILIES", "NEEDS_PSI", "auto_envelopes", "combined", "envelopes_for", "stitch"]
