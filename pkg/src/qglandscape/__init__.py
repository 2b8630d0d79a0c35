"""Schrodinger eigenproblems on quantum graphs and certified landscape envelopes."""

__version__ = "0.1.0"

from .cases import CASES, CaseStudy, build_case_study
from .envelope import Envelope, pointwise_min
from .estimators import EigenSolver, LandscapeEnvelope, TorsionLandscape
from .exceptions import InputError, NumericalFailure, QuantumGraphError
from .graph import GraphPath, GraphPoint, MetricGraph, build_graph, double_leaves, shortest_path
from .potential import Constant, Cosine, PotentialField, Quadratic, Sampled
from .regions import Region, classify_regions
from .spectral import Eigenpair, solve
from .specfile import GraphSpec, dump_spec, load_spec, parse_spec
from .uniform import heat_majorant, uniform_bound
from .verify import check_domination, harnack_constant, select_regime

__all__ = [
    "CASES", "CaseStudy", "Constant", "Cosine", "Eigenpair", "EigenSolver", "Envelope", "GraphPath", "GraphPoint",
    "GraphSpec", "InputError", "LandscapeEnvelope", "MetricGraph", "NumericalFailure", "PotentialField",
    "Quadratic", "QuantumGraphError", "Region", "Sampled", "TorsionLandscape", "build_case_study", "build_graph",
    "check_domination", "classify_regions", "double_leaves", "dump_spec", "harnack_constant", "heat_majorant",
    "load_spec", "parse_spec", "pointwise_min", "select_regime", "shortest_path", "solve", "uniform_bound",
]
