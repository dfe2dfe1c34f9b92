"""
Error types for the graphical mean curvature flow laboratory.

Input problems derive from ValueError so callers that only know about
ValueError keep working.
"""

from typing import List, Optional, Tuple


class GMCFError(Exception):
    """Base class for every error raised by the package."""


class InvalidFieldError(GMCFError, ValueError):
    """A map field contains non-finite values or has inconsistent shapes."""


class BlowUpError(GMCFError):
    """Non-finite values appeared while evolving the flow."""

    def __init__(self, message: str, t: float = 0.0,
                 point: Optional[Tuple[int, int]] = None, last_state=None):
        super().__init__(message)
        self.t = t
        self.point = point
        self.last_state = last_state


class NotAreaDecreasingError(GMCFError, ValueError):
    """The initial map violates lambda1 * lambda2 < 1 somewhere on the grid."""

    def __init__(self, message: str, point: Optional[Tuple[int, int]] = None,
                 value: float = 0.0):
        super().__init__(message)
        self.point = point
        self.value = value


class NotLagrangianError(GMCFError, ValueError):
    """The Jacobian of the map is not symmetric within tolerance."""


class ConfigError(GMCFError, ValueError):
    """Configuration text could not be turned into a valid RunConfig."""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors) if self.errors else "invalid configuration")


class SnapshotFormatError(GMCFError, ValueError):
    """Snapshot sidecar is malformed or carries an unknown format version."""
