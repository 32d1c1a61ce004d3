"""
Exception hierarchy
Every failure raised by the toolkit derives from HomogenizationError; the CLI
maps the families below to exit codes (see config.EXIT_CODES).
"""


class HomogenizationError(Exception):
    """Base class for toolkit failures"""


class ConfigError(HomogenizationError, ValueError):
    """Study configuration violates the schema"""

    def __init__(self, message: str, errors=None):
        super().__init__(message)
        self.errors = list(errors or [])

    def __str__(self) -> str:
        base = super().__str__()
        if not self.errors:
            return base
        return base + "\n" + "\n".join(f"  - {item}" for item in self.errors)


class ShapeError(HomogenizationError, ValueError):
    """Dimension or shape mismatch between operands"""


class DomainError(HomogenizationError, ValueError):
    """Argument outside the domain of an operation"""


class GateError(HomogenizationError):
    """Operation refused because its sufficient condition does not hold"""


class SolverError(HomogenizationError, RuntimeError):
    """Numerical solve failed"""


class ConvergenceError(SolverError):
    """Iterative method hit its iteration cap"""


class SpectrumError(SolverError):
    """Shift hits (or nearly hits) the discrete spectrum"""


class ResolutionError(SolverError):
    """Discretization too coarse for the requested scale"""


class ExtensionError(SolverError):
    """Extension operator cannot be built for the requested geometry"""
