"""Exception hierarchy shared by the solver library and the command line tool.

Each class maps to one command line exit code, so library code should raise
the most specific type that applies.
"""


class FracDGError(Exception):
    """Base class for all package errors."""


class ArgumentContractError(FracDGError, ValueError):
    """An argument violates a documented precondition. Exit code 2."""


class CoefficientError(FracDGError):
    """A PDE coefficient violates its sign or validity condition. Exit code 3."""


class SolverError(FracDGError):
    """A linear or nonlinear solve failed to produce a valid solution. Exit code 4."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


class OutputError(FracDGError):
    """Reading or writing an experiment artifact failed. Exit code 5."""
