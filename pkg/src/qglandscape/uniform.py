"""Heat-kernel (hypercontractive) uniform bounds with explicit constants."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .envelope import Envelope
from .exceptions import BadParameters, EnergyBelowInf, InsufficientSpectrum
from .regions import Region

TAIL_TOL = 1e-12


VARIANTS = ("certified", "optimized", "literal")


def constant_C2(g):
    """The closed-form constant ``3m / (2 min|e|)`` of the literal variant."""
    return 3.0 * g.m / (2.0 * g.min_edge_length)


def _gap(E, V_min, strict):
    gap = float(E) - float(V_min)
    slack = 1e-9 * max(1.0, abs(E))
    if gap < -slack or (strict and gap <= 0):
        raise EnergyBelowInf(f"E = {E} must exceed inf V = {V_min}")
    return max(gap, 0.0)


def oldbve_sum(g, E, V_min, C2=None):
    """Bound on ``sum_{E_j <= E} ||psi_j||^2_inf``: ``C^2 (sqrt(2e gap/pi) + sqrt(e)/min|e|)``.

    ``C2`` defaults to ``3m/2``, the factor between the graph heat kernel and
    the decoupled edge kernels.
    """
    gap = _gap(E, V_min, strict=False)
    C2 = 1.5 * g.m if C2 is None else float(C2)
    return C2 * (math.sqrt(2 * math.e * gap / math.pi) + math.sqrt(math.e) / g.min_edge_length)


def optimized_sum(g, E, V_min):
    """``min_t e^(gap t) (3/2) sum_e p_hat_e(t)`` with exact theta values."""
    gap = _gap(E, V_min, strict=False)

    def f(logt):
        t = math.exp(logt)
        tot = sum(sum(p_hat_edge(t, e.length)) for e in g.edges)
        return gap * t + math.log(1.5 * tot)

    res = minimize_scalar(f, bounds=(-20.0, 10.0), method="bounded", options={"xatol": 1e-10})
    return math.exp(min(float(res.fun), f(-20.0), f(10.0)))


def uniform_bound(g, E, V_min, *, variant="certified", C2=None):
    """Uniform bound on ``|psi_j|`` for every eigenpair with ``E_j <= E``.

    ``certified``: square root of :func:`oldbve_sum`. ``optimized``: the same
    chain with the time parameter optimized. ``literal``: ``C (E - inf V)^(1/4)``
    with ``C^2 = 3m/(2 min|e|)``; kept for comparison only since it can
    undercut ``|psi|``.
    """
    if variant == "certified":
        return math.sqrt(oldbve_sum(g, E, V_min, C2))
    if variant == "optimized":
        return math.sqrt(optimized_sum(g, E, V_min))
    if variant == "literal":
        gap = _gap(E, V_min, strict=True)
        return math.sqrt(constant_C2(g) if C2 is None else C2) * gap ** 0.25
    raise BadParameters(f"unknown variant {variant!r}; choose from {VARIANTS}")


def uniform_envelope(g, E, V_min, *, variant="certified"):
    val = uniform_bound(g, E, V_min, variant=variant)
    prov = {"E": E, "V_min": V_min, "m": g.m, "min_edge": g.min_edge_length, "variant": variant,
            "C2_literal": constant_C2(g), "value": val}
    return Envelope("uniform", g, Region.full(g), lambda e, s: np.full(np.shape(s), val), prov)


def cluster_bound(g, eigenpairs, E, V_min):
    """Per-edge ``sum_{E_j <= E} ||psi_j||^2_inf(e)`` against the right-hand sides."""
    gap = _gap(E, V_min, strict=False)
    literal = constant_C2(g) * math.sqrt(gap)
    certified = oldbve_sum(g, E, V_min)
    optimized = optimized_sum(g, E, V_min)
    out = {}
    for e in g.edges:
        lhs = sum(p.sup_norm(e.id) ** 2 for p in eigenpairs if p.energy <= E)
        out[e.id] = {"lhs": lhs, "rhs_literal": literal, "rhs_certified": certified, "rhs_optimized": optimized}
    return out


def sinc_constant():
    """``M = 2 max_{x >= pi} 1/(1 - sin x / x)``."""
    # sin x / x is largest on [pi, inf) in its first positive lobe (2 pi, 3 pi)
    res = minimize_scalar(lambda x: -math.sin(x) / x, bounds=(2 * math.pi, 3 * math.pi), method="bounded",
                          options={"xatol": 1e-14})
    x = float(res.x)
    return 2.0 / (1.0 - math.sin(x) / x), x


def cosine_ratio(sqrtE_len):
    """Lower bound factor ``(1/2)(1 - sin z / z)`` relating L2 and Linf on an edge."""
    z = sqrtE_len
    return 0.5 * (1.0 - math.sin(z) / z)


# --------------------------------------------------------------------------
# theta series

def theta3_sum(qv, tol=TAIL_TOL):
    """``sum_{n>=1} qv^(n^2)`` and a certified bound on the truncation error."""
    if not 0 <= qv < 1:
        raise BadParameters("nome must lie in [0, 1)")
    total, n = 0.0, 1
    while True:
        term = qv ** (n * n)
        total += term
        tail = qv ** ((n + 1) ** 2) / (1.0 - qv ** (2 * n + 3))
        if tail <= tol * max(total, 1e-300) or tail < 1e-300:
            return total, tail
        n += 1


def p_hat_edge(t, length):
    """``(1/|e|) theta_3(0, exp(-(pi/|e|)^2 t))``."""
    s, tail = theta3_sum(math.exp(-(math.pi / length) ** 2 * t))
    return (1.0 + 2.0 * s) / length, 2.0 * tail / length


# --------------------------------------------------------------------------
# free spectrum of equilateral graphs

@dataclass(frozen=True)
class FreeMode:
    eigenvalue: float
    sup_sq: dict  # edge -> ||phi||^2_inf(e)


def _edge_sup(alpha, beta, k, L):
    """``max |alpha cos(ks) + beta sin(ks)/k|`` on ``[0, L]``."""
    a, b = alpha, beta / k
    R = math.hypot(a, b)
    phi = math.atan2(b, a)
    # extrema where k s - phi = j pi
    j0 = math.ceil((-phi) / math.pi - 1e-12)
    j1 = math.floor((k * L - phi) / math.pi + 1e-12)
    if j1 >= j0:
        return R
    return max(abs(a), abs(a * math.cos(k * L) + b * math.sin(k * L)))


def _gram(k, L, c1, c2):
    """``int_0^L`` of the product of two ``alpha cos + beta sin/k`` functions."""
    a1, b1 = c1[0], c1[1] / k
    a2, b2 = c2[0], c2[1] / k
    x = k * L
    cc = 0.5 * L + math.sin(2 * x) / (4 * k)
    ss = 0.5 * L - math.sin(2 * x) / (4 * k)
    sc = math.sin(x) ** 2 / (2 * k)
    return a1 * a2 * cc + b1 * b2 * ss + (a1 * b2 + a2 * b1) * sc


def _vertex_matrix(g, k):
    """Continuity + Kirchhoff system for coefficients ``(alpha_e, beta_e)``."""
    idx = {e.id: i for i, e in enumerate(g.edges)}
    m = g.m
    rows = []
    for v in g.vertices:
        ends = g.incident(v)
        vals, ders = [], []
        for eid, end in ends:
            i = idx[eid]
            L = g.length(eid)
            val = np.zeros(2 * m)
            der = np.zeros(2 * m)
            if end == 0:
                val[2 * i] = 1.0
                der[2 * i + 1] = 1.0
            else:
                val[2 * i] = math.cos(k * L)
                val[2 * i + 1] = math.sin(k * L) / k
                der[2 * i] = k * math.sin(k * L)  # outgoing = -psi'(L)
                der[2 * i + 1] = -math.cos(k * L)
            vals.append(val)
            ders.append(der)
        for r in vals[1:]:
            rows.append(r - vals[0])
        rows.append(np.sum(ders, axis=0))
    return np.array(rows)


def free_spectrum_equilateral(g, k_max):
    """Exact nonzero eigenvalues ``k^2 <= k_max^2`` of the free Laplacian with
    per-edge squared sup norms for an orthonormal eigenbasis."""
    lengths = {e.length for e in g.edges}
    if len(lengths) != 1:
        raise BadParameters("free spectrum is implemented for equilateral graphs")
    L = lengths.pop()
    deg = np.array([g.degree(v) for v in g.vertices], float)
    vidx = {v: i for i, v in enumerate(g.vertices)}
    A = np.zeros((len(deg), len(deg)))
    for e in g.edges:
        A[vidx[e.u], vidx[e.v]] += 1
        A[vidx[e.v], vidx[e.u]] += 1
    mu = np.linalg.eigvals(A / deg[:, None]).real
    cands = set()
    jmax = int(k_max * L / (2 * math.pi)) + 2
    for m_ in mu:
        th = math.acos(max(-1.0, min(1.0, m_)))
        for j in range(jmax + 1):
            for x in (th + 2 * math.pi * j, -th + 2 * math.pi * j):
                if 1e-9 < x <= k_max * L + 1e-9:
                    cands.add(round(x / L, 10))
    for j in range(1, int(k_max * L / math.pi) + 1):
        cands.add(round(j * math.pi / L, 10))
    modes = []
    for k in sorted(cands):
        Z = _vertex_matrix(g, k)
        _, sv, Vt = np.linalg.svd(Z)
        null = Vt[sv < 1e-8 * max(1.0, sv.max())]
        if len(null) == 0:
            continue
        G = np.zeros((len(null), len(null)))
        for a in range(len(null)):
            for b in range(len(null)):
                G[a, b] = sum(_gram(k, e.length, null[a][2 * i:2 * i + 2], null[b][2 * i:2 * i + 2])
                              for i, e in enumerate(g.edges))
        w, U = np.linalg.eigh(G)
        basis = (U / np.sqrt(w)).T @ null
        for c in basis:
            sup = {e.id: _edge_sup(c[2 * i], c[2 * i + 1], k, e.length) ** 2 for i, e in enumerate(g.edges)}
            modes.append(FreeMode(k * k, sup))
    return modes


def _neumann_tail(g, n_known, t):
    """Certified bound on ``sum_{n > n_known} exp(-mu_n t)`` over decoupled Neumann eigenvalues."""
    vals = []
    J = 0
    while True:
        J = max(2 * J, 64)
        vals = sorted((j * math.pi / e.length) ** 2 for e in g.edges for j in range(J + 1))
        rem = sum(math.exp(-((J + 1) * math.pi / e.length) ** 2 * t)
                  / (1.0 - math.exp(-(2 * J + 3) * (math.pi / e.length) ** 2 * t)) for e in g.edges)
        if rem < 1e-15 and len(vals) > n_known:
            break
        if J > 1 << 16:
            raise InsufficientSpectrum("Neumann tail does not converge")
    return sum(math.exp(-mu * t) for mu in vals[n_known:]) + rem


def heat_majorant(g, t, *, k_max=None, tail_tol=1e-9):
    """Both sides of the heat-kernel comparison inequalities for a free equilateral graph."""
    L = g.edges[0].length
    if k_max is None:
        k_max = math.sqrt(40.0 / t) + 4 * math.pi / L
    modes = free_spectrum_equilateral(g, k_max)
    n_known = len(modes) + 1  # include the constant mode
    tail_count = _neumann_tail(g, n_known, t)
    total = g.total_length
    M, _ = sinc_constant()
    per_edge = {}
    for e in g.edges:
        partial = 1.0 / total + sum(math.exp(-md.eigenvalue * t) * md.sup_sq[e.id] for md in modes)
        tail = 3.0 / e.length * tail_count
        pe, pe_tail = p_hat_edge(t, e.length)
        small = sum(math.exp(-md.eigenvalue * t) for md in modes if math.sqrt(md.eigenvalue) < math.pi / e.length)
        large = sum(math.exp(-md.eigenvalue * t) for md in modes if math.sqrt(md.eigenvalue) >= math.pi / e.length)
        per_edge[e.id] = {
            "p_gamma": partial, "p_gamma_tail": tail, "p_edge": pe, "p_edge_tail": pe_tail,
            "hkub_rhs": 1.0 / total + (3.0 * small + M * large) / e.length,
        }
    if max(v["p_gamma_tail"] for v in per_edge.values()) > tail_tol:
        raise InsufficientSpectrum(f"tail bound above {tail_tol:g}; raise k_max")
    lhs = sum(v["p_gamma"] + v["p_gamma_tail"] for v in per_edge.values())
    rhs = 1.5 * sum(v["p_edge"] for v in per_edge.values())
    return {"t": t, "per_edge": per_edge, "hkub2_lhs": lhs, "hkub2_rhs": rhs, "modes": len(modes),
            "k_max": k_max, "hkub_ok": all(v["p_gamma"] + v["p_gamma_tail"] <= v["hkub_rhs"]
                                           for v in per_edge.values()),
            "hkub2_ok": lhs <= rhs}


def circle_p_hat(t, length=2 * math.pi):
    """Closed form ``p_hat`` for a circle made of one edge."""
    c = 2 * math.pi / length
    s, _ = theta3_sum(math.exp(-(c ** 2) * t))
    return (1.0 + 4.0 * s) / length
