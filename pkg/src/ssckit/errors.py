"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: validation problems (bad parameters,
malformed structures, unreadable input files) exit with 2, numeric and
resource problems exit with 3, and verification failures exit with 4.
"""


class SsckitError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameterError(SsckitError, ValueError):
    """An argument is outside its documented domain."""


class StructuralError(SsckitError, ValueError):
    """An access structure or subset family is malformed."""


class SingularModelError(SsckitError, ValueError):
    """A covariance matrix is singular or not positive definite."""


class InfeasibleDistortionError(SsckitError, ValueError):
    """The requested distortion is unreachable for the given side information."""


class ResourceLimitError(SsckitError, RuntimeError):
    """A desk-scale guard (enumeration or codebook size) was exceeded."""


class NumericError(SsckitError, ArithmeticError):
    """A numerical self-check failed or an integration did not converge."""
