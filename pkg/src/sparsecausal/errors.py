"""Exception hierarchy."""

import numpy as np


class SparseCausalError(Exception):
    """Base class for every error raised by this package."""


class InvalidArgumentError(SparseCausalError, ValueError):
    pass


class DimensionError(SparseCausalError, ValueError):
    pass


class InsufficientLengthError(SparseCausalError, ValueError):
    pass


class NumericOverflowError(SparseCausalError, ArithmeticError):
    pass


class ZeroVarianceError(SparseCausalError, ValueError):
    pass


class NonFiniteError(SparseCausalError, ValueError):
    pass


class SingularMatrixError(SparseCausalError, np.linalg.LinAlgError):
    pass


class NotPositiveDefiniteError(SingularMatrixError):
    pass


class NearSingularCliqueError(SingularMatrixError):
    pass


class NumericalIntegrityError(SparseCausalError, ArithmeticError):
    """An information quantity came out negative beyond round-off."""


class ConvergenceError(SparseCausalError, RuntimeError):
    """Iterative solver stopped at ``max_iter`` without meeting its tolerance.

    The last iterate and the residual are kept so callers can decide whether
    the partial answer is usable.
    """

    def __init__(self, message, iterate=None, residual=None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual
