"""Exception hierarchy.

``HypothesisError`` (and subclasses) signal that the caller asked for
something outside a formula's domain; the CLI maps them to exit code 2.
Anything else deriving from ``EquideformError`` is an internal failure.
"""


class EquideformError(Exception):
    """Base class for all library errors."""


class HypothesisError(EquideformError, ValueError):
    """A documented precondition of an operation is violated."""


class ModulusMismatch(HypothesisError):
    pass


class PrecisionError(EquideformError):
    """Requested quantity cannot be certified at the available precision."""


class ExistenceFails(HypothesisError):
    """No trace-zero unit vector field exists for this action."""


class NotLiftable(EquideformError):
    """The node action admits no first-order lift to xy = eps."""


class StabilizationFailure(EquideformError):
    """Brute-force cohomology changed under a precision bump."""

    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values


class SpecError(HypothesisError):
    """Malformed global curve document; ``pointer`` is a JSON pointer."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer
