"""Exception hierarchy.

Each class carries the CLI exit code its failure maps to, so the command
line layer can translate errors without a lookup table.
"""


class ViespecError(Exception):
    exit_code = 1


class DomainError(ViespecError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class GeometryError(ViespecError, ValueError):
    """A scatterer description does not fit the grid."""

    exit_code = 2


class SingularityError(DomainError):
    """A kernel was evaluated at zero separation."""


class DimensionError(ViespecError, ValueError):
    pass


class SizeError(ViespecError):
    """Dense assembly refused because the grid exceeds the dense cap."""

    exit_code = 2


class AccuracyError(ViespecError):
    exit_code = 3


class NearSingularSymbolError(ViespecError):
    exit_code = 3


class UndefinedCaseError(ViespecError, ValueError):
    pass


class RegimeError(ViespecError):
    """The physical assumptions behind a bound do not hold."""

    exit_code = 3


class ConvergenceError(ViespecError):
    """Iteration cap reached; ``partial`` holds whatever did converge."""

    exit_code = 3

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InfeasiblePlanError(ViespecError):
    exit_code = 3


class DivergenceError(ViespecError):
    exit_code = 3

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class ConfigError(ViespecError):
    exit_code = 2
