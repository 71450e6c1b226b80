"""Exception hierarchy shared across the package."""

import numpy as np


class FSCNMFError(Exception):
    """Base class for all package errors."""


class ShapeError(FSCNMFError, ValueError):
    """Operand shapes are incompatible."""


class ParameterError(FSCNMFError, ValueError):
    """A hyperparameter or argument is out of its valid range."""


class SingularMatrixError(FSCNMFError, np.linalg.LinAlgError):
    """A pivot fell below the singularity threshold during inversion."""


class ConvergenceError(FSCNMFError, RuntimeError):
    """An iterative routine hit its iteration cap before reaching tolerance.

    ``result`` holds the last iterate, for callers that can live with it.
    """

    def __init__(self, message, residual, result=None):
        super().__init__(message)
        self.residual = residual
        self.result = result


class ParseError(FSCNMFError, ValueError):
    """Malformed input file; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(FSCNMFError, ValueError):
    """Input values violate a domain constraint (e.g. negative entries)."""


class NodeReferenceError(FSCNMFError, KeyError):
    """A file refers to a node id that is not in the graph."""


class CompletenessError(FSCNMFError, ValueError):
    """Some nodes are missing a required annotation."""


class StratificationError(FSCNMFError, ValueError):
    """A class is too small to be split into train and test parts."""


class NumericalFailureError(FSCNMFError, FloatingPointError):
    """A factor matrix became non-finite; ``trace`` holds the costs recorded so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
