"""
Error hierarchy shared by every layer.
The CLI maps each class to a stable exit code.
"""

from typing import Optional


class AntidistError(Exception):
    """Base class for all errors raised by this package"""


class InvalidParameterError(AntidistError):
    """A precondition or a model invariant does not hold (raised through pydantic validators unwrapped)"""


class DimensionMismatchError(InvalidParameterError):
    """Operand dimensions are incompatible"""


class NotHermitianError(InvalidParameterError):
    """An operator expected to be Hermitian is not"""


class SchemaError(InvalidParameterError):
    """An input document does not match the JSON value encoding"""


class CapabilityError(AntidistError):
    """The requested computation exceeds a configured capability limit"""


class NonConvergenceError(AntidistError, RuntimeError):
    """An iterative solver stopped before certifying its result"""

    def __init__(self, message: str, best_gap: Optional[float] = None, iterations: int = 0):
        super().__init__(message)
        self.best_gap = best_gap
        self.iterations = iterations

    def __str__(self) -> str:
        base = super().__str__()
        if self.best_gap is None:
            return base
        return f"{base} (best gap {self.best_gap:.3e} after {self.iterations} iterations)"
