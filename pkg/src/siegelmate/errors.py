"""Exception hierarchy shared by every module.

The CLI maps :class:`NumericError` (and subclasses) to exit status 1.
"""


class SiegelMateError(Exception):
    """Base class for toolkit errors."""


class NumericError(SiegelMateError):
    """A computation produced non-finite values or could not converge."""


class PrecisionError(NumericError):
    """Requested digits or floors cannot be resolved at the working precision."""

    def __init__(self, message, q=None):
        super().__init__(message)
        self.q = q


class DegenerateModelError(SiegelMateError, ValueError):
    """Parameters at which a model or normal form collapses."""


class SolverError(NumericError):
    """Parameter solver failed; carries the diagnostic scan table."""

    def __init__(self, message, scan=None):
        super().__init__(message)
        self.scan = scan or []


class TrackingError(NumericError):
    """Continuity tracking of an inverse branch lost the branch."""

    def __init__(self, message, parameter=None):
        super().__init__(message)
        self.parameter = parameter


class AmbiguityError(NumericError):
    """Two candidate points satisfy a selection rule within tolerance."""

    def __init__(self, message, candidates=None):
        super().__init__(message)
        self.candidates = candidates or []


class NoTrapError(NumericError):
    """No trap radius passed forward-invariance validation."""
