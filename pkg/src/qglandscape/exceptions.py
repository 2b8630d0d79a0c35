"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`QuantumGraphError`, so callers can catch one base class. The CLI maps
the subclasses to exit codes: input errors give 2 and numerical failures give 3.
"""


class QuantumGraphError(Exception):
    """Base class for all package errors."""


class InputError(QuantumGraphError, ValueError):
    """Invalid user input (graph spec, parameters, files)."""


class NumericalFailure(QuantumGraphError, RuntimeError):
    """A numerical procedure could not certify its result."""


# graph_core
class DisconnectedGraph(InputError):
    pass


class EdgeTooShort(InputError):
    pass


class DegreeTooLarge(InputError):
    pass


class NegativePotential(InputError):
    pass


class Unreachable(NumericalFailure):
    pass


class SpecParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# spectral
class StepTooCoarse(InputError):
    pass


class ConvergenceFailure(NumericalFailure):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


# agmon / window / torsion-agmon
class RegionNotTunneling(InputError):
    pass


class CollarError(InputError):
    pass


class CollarContainsVertex(CollarError):
    pass


class CollarOverlap(CollarError):
    pass


class PointTooCloseToBoundary(InputError):
    pass


class NoSeparatingInterval(InputError):
    pass


class EmptyRegion(InputError):
    pass


# torsion
class DegenerateMinorant(InputError):
    pass


class SupersolutionFailure(NumericalFailure):
    def __init__(self, message, worst_slack=None):
        self.worst_slack = worst_slack
        super().__init__(message)


class UnverifiedSupersolution(InputError):
    pass


class AssemblyInfeasible(InputError):
    pass


# local bounds
class ShiftNotBelowE(InputError):
    pass


class SubintervalTooShort(InputError):
    pass


# uniform bounds
class EnergyBelowInf(InputError):
    pass


class InsufficientSpectrum(NumericalFailure):
    pass


# verify
class PathNotFound(InputError):
    pass


# harness
class MethodInapplicable(InputError):
    pass


class GridMismatch(InputError):
    pass


class BadParameters(InputError):
    pass
