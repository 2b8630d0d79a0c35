"""Discretization of ``H = -d^2/dx^2 + V`` with Kirchhoff vertex conditions.

Each edge gets a uniform grid whose end nodes are the shared vertex unknowns.
The operator is the lumped-mass linear finite element scheme: interior rows are
the usual three-point Laplacian, vertex rows collect the one-sided fluxes of all
incident edges. Kirchhoff is the natural boundary condition of the weak form,
so it is built in; the matrix is symmetric with diagonal mass weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicHermiteSpline

from .exceptions import BadParameters, ConvergenceFailure, StepTooCoarse
from .graph import GraphPoint, MetricGraph
from .potential import PotentialField

DENSE_THRESHOLD = 4000
_GL_X, _GL_W = leggauss(8)


@dataclass(frozen=True)
class EdgeGrid:
    edge: str
    s: np.ndarray
    dofs: np.ndarray

    @property
    def h(self):
        return float(self.s[1] - self.s[0])

    @property
    def n_cells(self):
        return len(self.s) - 1


@dataclass(frozen=True)
class DiscretizedHamiltonian:
    graph: MetricGraph
    potential: PotentialField
    h: float
    grids: dict
    stiffness: sp.csr_matrix  # Laplacian part only
    potential_weights: np.ndarray  # lumped integral of V against each hat function
    mass: np.ndarray  # lumped mass (trapezoid weights)

    @property
    def dim(self):
        return len(self.mass)

    @property
    def matrix(self):
        return (self.stiffness + sp.diags(self.potential_weights)).tocsr()

    def symmetric_operator(self):
        d = 1.0 / np.sqrt(self.mass)
        D = sp.diags(d)
        return (D @ self.matrix @ D).tocsr()


def assemble(g: MetricGraph, V: PotentialField, h: float, *, h_max=None) -> DiscretizedHamiltonian:
    """Assemble stiffness, lumped potential and lumped mass on a grid of step ``<= h``."""
    h = float(h)
    if not h > 0:
        raise StepTooCoarse("step must be positive")
    if h_max is not None and h > h_max:
        raise StepTooCoarse(f"h = {h} exceeds h_max = {h_max}")
    for e in g.edges:
        if h > e.length / 4 * (1 + 1e-12):
            raise StepTooCoarse(f"h = {h:g} > |e|/4 on edge {e.id} (|e| = {e.length:g})")
    vidx = {v: i for i, v in enumerate(g.vertices)}
    n = len(g.vertices)
    grids = {}
    rows, cols, vals = [], [], []
    mass_parts, pot_parts = [np.zeros(n)], [np.zeros(n)]
    mass = np.zeros(n)
    potw = np.zeros(n)
    for e in g.edges:
        N = max(4, int(math.ceil(e.length / h - 1e-9)))
        s = np.linspace(0.0, e.length, N + 1)
        he = e.length / N
        dofs = np.empty(N + 1, dtype=np.int64)
        dofs[0], dofs[-1] = vidx[e.u], vidx[e.v]
        dofs[1:-1] = np.arange(n, n + N - 1)
        n += N - 1
        grids[e.id] = EdgeGrid(e.id, s, dofs)
        a, b = dofs[:-1], dofs[1:]
        k = 1.0 / he
        rows += [a, b, a, b]
        cols += [a, b, b, a]
        vals += [np.full(N, k), np.full(N, k), np.full(N, -k), np.full(N, -k)]
        w = np.full(N + 1, he)
        w[0] = w[-1] = he / 2
        vs = np.asarray(V(e.id, s), dtype=float)
        # vertex ends accumulate into the shared vertex entries
        mass[dofs[0]] += w[0]
        mass[dofs[-1]] += w[-1]
        potw[dofs[0]] += w[0] * vs[0]
        potw[dofs[-1]] += w[-1] * vs[-1]
        mass_parts.append(w[1:-1])
        pot_parts.append(w[1:-1] * vs[1:-1])
    mass = np.concatenate([mass] + mass_parts[1:])
    potw = np.concatenate([potw] + pot_parts[1:])
    r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    K = sp.coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
    K.sum_duplicates()
    return DiscretizedHamiltonian(g, V, h, grids, K, potw, mass)


# --------------------------------------------------------------------------

@dataclass(eq=False)
class Eigenpair:
    """Eigenvalue and sampled eigenfunction, normalized under the trapezoid rule."""

    energy: float
    discrete_energy: float
    index: int
    graph: MetricGraph
    potential: PotentialField
    samples: dict  # edge -> (s, values, derivatives)
    residual: float
    h: float
    quadrature: str = "trapezoid"
    extrapolation: tuple = ()
    _splines: dict = field(default_factory=dict, repr=False)

    def _spline(self, edge):
        sp_ = self._splines.get(edge)
        if sp_ is None:
            s, u, du = self.samples[edge]
            sp_ = CubicHermiteSpline(s, u, du)
            self._splines[edge] = sp_
        return sp_

    def values(self, edge, s):
        return self._spline(edge)(np.asarray(s, dtype=float))

    def derivatives(self, edge, s):
        return self._spline(edge)(np.asarray(s, dtype=float), 1)

    def evaluate(self, x: GraphPoint):
        """Value and derivative; at a vertex the derivative is a dict of
        outgoing derivatives keyed by incident edge end."""
        if x.vertex is not None:
            val = None
            outs = {}
            for eid, end in self.graph.incident(x.vertex):
                s, u, du = self.samples[eid]
                idx = 0 if end == 0 else -1
                val = u[idx] if val is None else val
                outs[(eid, end)] = du[idx] if end == 0 else -du[idx]
            return float(val), outs
        return float(self.values(x.edge, x.s)), float(self.derivatives(x.edge, x.s))

    def sup_norm(self, edge=None, n=None):
        edges = [edge] if edge is not None else list(self.samples)
        best = 0.0
        for eid in edges:
            s = self.samples[eid][0]
            fine = np.linspace(s[0], s[-1], n or 4 * len(s))
            best = max(best, float(np.max(np.abs(self.values(eid, fine)))),
                       float(np.max(np.abs(self.samples[eid][1]))))
        return best

    def integral(self, edge, a, b, weight=None):
        """``int_a^b w(s) psi(s)^2 ds`` by Gauss-Legendre on grid cells."""
        if b <= a:
            return 0.0
        s = self.samples[edge][0]
        inner = s[(s > a) & (s < b)]
        knots = np.concatenate([[a], inner, [b]])
        lo, hi = knots[:-1], knots[1:]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        x = mid[:, None] + half[:, None] * _GL_X[None, :]
        f = self.values(edge, x) ** 2
        if weight is not None:
            f = f * weight(x)
        return float(np.sum(half[:, None] * _GL_W[None, :] * f))

    def norm_sq(self, region=None):
        """L2 mass on a region (default: whole graph, trapezoid rule)."""
        if region is None:
            tot = 0.0
            for eid, (s, u, _) in self.samples.items():
                tot += np.trapezoid(u ** 2, s) if hasattr(np, "trapezoid") else np.trapz(u ** 2, s)
            return float(tot)
        return float(sum(self.integral(eid, a, b) for eid, iv in region.items() for a, b in iv))

    def kirchhoff_sums(self):
        out = {}
        for v in self.graph.vertices:
            out[v] = float(sum(self.evaluate(self.graph.vertex_point(v))[1].values()))
        return out

    def vertex_values(self):
        out = {}
        for v in self.graph.vertices:
            vals = []
            for eid, end in self.graph.incident(v):
                u = self.samples[eid][1]
                vals.append(u[0] if end == 0 else u[-1])
            out[v] = vals
        return out


def _edge_derivatives(s, u, vs, E, dvs=None):
    """Derivative samples, h^2 terms removed with psi''' = V' psi + (V - E) psi'."""
    h = s[1] - s[0]
    dvs = np.zeros_like(u) if dvs is None else dvs
    q = vs - E
    du = np.empty_like(u)
    c = (u[2:] - u[:-2]) / (2 * h)
    du[1:-1] = c - h * h / 6 * (dvs[1:-1] * u[1:-1] + q[1:-1] * c)
    # one-sided at the ends, using psi'' = (V - E) psi
    f0 = (u[1] - u[0]) / h - 0.5 * h * q[0] * u[0]
    f1 = (u[-1] - u[-2]) / h + 0.5 * h * q[-1] * u[-1]
    du[0] = f0 - h * h / 6 * (dvs[0] * u[0] + q[0] * f0)
    du[-1] = f1 - h * h / 6 * (dvs[-1] * u[-1] + q[-1] * f1)
    return du


def _rayleigh_ritz(A, Y):
    Q, _ = np.linalg.qr(Y)
    T = Q.T @ (A @ Q)
    T = 0.5 * (T + T.T)
    w, S = np.linalg.eigh(T)
    return w, Q @ S


def _lowest(Hd: DiscretizedHamiltonian, k, dense_threshold):
    A = Hd.symmetric_operator()
    n = Hd.dim
    if k > n:
        raise BadParameters(f"k = {k} exceeds dimension {n}")
    if n < dense_threshold:
        w, Y = sla.eigh(A.toarray(), subset_by_index=[0, k - 1])
        return A, w, Y
    kk = min(n - 2, k + 4)
    sigma = float(np.min(Hd.potential_weights / Hd.mass)) - 1.0
    v0 = np.ones(n) / math.sqrt(n)
    w, Y = spla.eigsh(A, k=kk, sigma=sigma, which="LM", v0=v0, tol=1e-13)
    w, Y = _rayleigh_ritz(A, Y)
    order = np.argsort(w)[:k]
    return A, w[order], Y[:, order]


def _fix_sign(y):
    i = int(np.argmax(np.abs(y) > 0.5 * np.max(np.abs(y))))
    return y if y[i] >= 0 else -y


def solve_eigs(Hd: DiscretizedHamiltonian, k: int, *, tol=1e-8, dense_threshold=DENSE_THRESHOLD):
    """The ``k`` lowest eigenpairs of the discrete problem (no extrapolation)."""
    if k < 1:
        raise BadParameters("k must be >= 1")
    A, w, Y = _lowest(Hd, k, dense_threshold)
    out = []
    dinv = 1.0 / np.sqrt(Hd.mass)
    for j in range(k):
        y = _fix_sign(Y[:, j])
        r = float(np.linalg.norm(A @ y - w[j] * y) / np.linalg.norm(y))
        if r > tol * max(1.0, abs(w[j])):
            raise ConvergenceFailure(f"mode {j}: residual {r:.3g} above tolerance", residual=r)
        u = dinv * y
        u /= math.sqrt(float(u @ (Hd.mass * u)))
        samples = {}
        for eid, grid in Hd.grids.items():
            ue = u[grid.dofs]
            vs = np.asarray(Hd.potential(eid, grid.s), dtype=float)
            dvs = np.asarray(Hd.potential.derivative(eid, grid.s), dtype=float)
            samples[eid] = (grid.s, ue, _edge_derivatives(grid.s, ue, vs, w[j], dvs))
        out.append(Eigenpair(float(w[j]), float(w[j]), j, Hd.graph, Hd.potential, samples, r, Hd.h))
    return out


def richardson(levels):
    """Repeated Richardson extrapolation for an O(h^2) sequence h, h/2, h/4, ..."""
    t = [np.asarray(x, dtype=float) for x in levels]
    p = 4.0
    while len(t) > 1:
        t = [(p * t[i + 1] - t[i]) / (p - 1.0) for i in range(len(t) - 1)]
        p *= 4.0
    return t[0]


def solve(g: MetricGraph, V: PotentialField, k: int, h: float = 0.02, *, levels: int = 3,
          tol=1e-8, dense_threshold=DENSE_THRESHOLD):
    """Eigenpairs with Richardson-extrapolated energies.

    Eigenfunctions come from the finest grid ``h / 2**(levels-1)``.
    """
    if levels < 1:
        raise BadParameters("levels must be >= 1")
    V.validate(g)
    energies, finest = [], None
    for i in range(levels):
        Hd = assemble(g, V, h / 2 ** i)
        pairs = solve_eigs(Hd, k, tol=tol, dense_threshold=dense_threshold)
        energies.append([p.energy for p in pairs])
        finest = pairs
    ext = richardson(energies)
    for p, e, col in zip(finest, ext, np.asarray(energies).T):
        p.energy = float(e)
        p.extrapolation = tuple(float(c) for c in col)
    return finest
