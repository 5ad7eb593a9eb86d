"""Exception hierarchy shared by the algebra kernels, services, CLI and API.

Every error carries an ``exit_code``: 1 for invalid input, 2 for window
failures, 3 for internal assertions (an identity that is proved to hold did
not hold, which is always a bug here).
"""
from typing import List, Optional


class AlgebraError(Exception):
    """Base class for all domain errors"""

    exit_code = 1


class InvalidComplexError(AlgebraError):
    """A differential does not square to zero or has the wrong shape"""


class InvalidModuleError(AlgebraError):
    """A dg-module failed validation; ``report`` lists every problem found"""

    def __init__(self, message: str, report: Optional[List[str]] = None):
        super().__init__(message)
        self.report = report or []


class DimensionMismatchError(AlgebraError):
    """Operands of incompatible shape or rank"""


class NotFreeError(AlgebraError):
    """A group action or Λ-module is required to be free and is not"""


class BoundsExceededError(AlgebraError):
    """An enumeration was requested beyond the configured desk-scale bounds"""


class InconsistentSystemError(AlgebraError):
    """A linear system over F2 has no solution"""


class SchemaError(AlgebraError):
    """An input document does not follow the expected JSON/YAML schema"""


class WindowError(AlgebraError):
    """A degree window is malformed"""

    exit_code = 2


class WindowTooSmallError(WindowError):
    """Homology does not vanish at a margin degree of the window"""

    def __init__(self, degree: int, dimension: int):
        super().__init__(
            f"window too small: homology of dimension {dimension} at margin degree {degree}"
        )
        self.degree = degree
        self.dimension = dimension


class TerminationBoundExceeded(AlgebraError):
    """A perturbation series did not vanish within its filtration bound"""

    exit_code = 3


class InternalAssertionError(AlgebraError):
    """A proved identity failed on a computed instance"""

    exit_code = 3
