"""Exception vocabulary shared across the package.

Every deliberate failure derives from :class:`ConvolabError`, so callers can
catch one base class.  Where a standard-library category fits, the class also
inherits from it (``ValueError``, ``ArithmeticError``, ``OSError``) so that
generic handlers keep working.
"""


class ConvolabError(Exception):
    """Base class for all errors raised on purpose by this package."""


class DomainError(ConvolabError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PoleError(DomainError):
    """Evaluation was requested exactly at a pole."""


class RangeError(ConvolabError, ValueError):
    """A query point lies outside the range covered by cached data."""


class ConvergenceError(ConvolabError, ArithmeticError):
    """An iterative estimator stopped before reaching its tolerance.

    Carries the best available estimate so callers can decide whether the
    partial result is still usable.
    """

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class FitError(ConvolabError, ValueError):
    """Regression input is too small, too narrow, or ill-conditioned."""


class DependencyError(ConvolabError):
    """A required cache or precomputed input is missing."""


class CapError(ConvolabError, ValueError):
    """Requested size exceeds a configured resource cap."""


class CacheFormatError(ConvolabError, OSError):
    """An on-disk cache is malformed, truncated, or fails its checksum."""
