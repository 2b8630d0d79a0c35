"""scikit-learn style wrappers: fit on a graph, predict at graph points."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_graph_input, check_points, check_positive
from .exceptions import BadParameters
from .pipeline import CLI_METHODS, auto_envelopes, combined, envelopes_for
from .spectral import solve
from .torsion import build_landscape
from .verify import check_domination


def _scatter(groups, n, evaluate, width=None):
    out = np.full((n,) if width is None else (n, width), np.nan)
    for eid, (ix, s) in groups.items():
        out[ix] = evaluate(eid, s)
    return out


class EigenSolver(BaseEstimator):
    """Lowest ``k`` Kirchhoff eigenpairs; ``predict`` returns eigenfunction values."""

    def __init__(self, k=6, h=0.02, levels=3, tol=1e-8):
        self.k = k
        self.h = h
        self.levels = levels
        self.tol = tol

    def fit(self, graph, potential=None):
        if int(self.k) < 1:
            raise BadParameters("k must be >= 1")
        check_positive("h", self.h)
        g, V = check_graph_input(graph, potential)
        self.graph_, self.potential_ = g, V
        self.eigenpairs_ = solve(g, V, int(self.k), h=float(self.h), levels=int(self.levels), tol=self.tol)
        self.eigenvalues_ = np.array([p.energy for p in self.eigenpairs_])
        return self

    def predict(self, X):
        """Array of shape ``(len(X), k)``."""
        check_is_fitted(self, "eigenpairs_")
        groups, n = check_points(X, self.graph_)
        return _scatter(groups, n, lambda e, s: np.column_stack([p.values(e, s) for p in self.eigenpairs_]),
                        width=len(self.eigenpairs_))


class TorsionLandscape(BaseEstimator):
    """Piecewise supersolution with ``(H + shift) Upsilon >= 1``."""

    def __init__(self, shift=0.0, mode="auto"):
        self.shift = shift
        self.mode = mode

    def fit(self, graph, potential=None):
        g, V = check_graph_input(graph, potential)
        self.landscape_ = build_landscape(g, V, shift=float(self.shift), mode=self.mode)
        self.graph_ = g
        return self

    def predict(self, X):
        check_is_fitted(self, "landscape_")
        groups, n = check_points(X, self.graph_)
        return _scatter(groups, n, self.landscape_)


class LandscapeEnvelope(BaseEstimator):
    """Certified upper bound on ``|psi|`` for one method (or ``auto``).

    ``fit(graph, potential, energy=..., eigenpair=...)``; ``predict`` gives NaN
    outside the validity region.
    """

    def __init__(self, method="auto", ell=None, delta=None, E_m=None, tau=None, shift=0.0, n=512):
        self.method = method
        self.ell = ell
        self.delta = delta
        self.E_m = E_m
        self.tau = tau
        self.shift = shift
        self.n = n

    def fit(self, graph, potential=None, *, energy=None, eigenpair=None):
        if self.method not in CLI_METHODS:
            raise BadParameters(f"unknown method {self.method!r}")
        g, V = check_graph_input(graph, potential)
        if energy is None:
            if eigenpair is None:
                raise BadParameters("need an energy or an eigenpair")
            energy = eigenpair.energy
        kw = {"ell": self.ell, "delta": self.delta, "E_m": self.E_m, "tau": self.tau}
        if self.method == "auto":
            labelled = auto_envelopes(g, V, energy, eigenpair, shift=float(self.shift), n=int(self.n), **kw)
        else:
            envs = envelopes_for(self.method, g, V, energy, eigenpair, shift=float(self.shift), **kw)
            labelled = [(self.method, e) for e in envs]
        self.graph_, self.energy_, self.labelled_ = g, float(energy), labelled
        self.envelope_ = combined([e for _, e in labelled], self.method)
        return self

    def predict(self, X):
        check_is_fitted(self, "envelope_")
        groups, n = check_points(X, self.graph_)
        return _scatter(groups, n, self.envelope_)

    def check(self, eigenpair, n=512):
        """Domination report against ``|psi|``."""
        check_is_fitted(self, "envelope_")
        return check_domination(eigenpair, self.envelope_, n=n)
