"""Exception hierarchy shared by every module."""


class LatDeckError(Exception):
    """Base class for all package errors."""


class InvalidInputError(LatDeckError, ValueError):
    """A style, ballot or deck references something that does not exist."""


class InvalidSwapError(LatDeckError, ValueError):
    """A mapping is not a bijection, or is the identity where a swap is required."""


class PreconditionError(LatDeckError, ValueError):
    """An operation was called outside its documented domain."""


class CapacityError(LatDeckError):
    """A configured size cap was exceeded."""


class SolverFailure(LatDeckError):
    """The MILP backend timed out or faulted. Callers may retry."""

    def __init__(self, status: str, message: str = "") -> None:
        super().__init__(f"{status}: {message}" if message else status)
        self.status = status


class InternalConsistencyError(LatDeckError, AssertionError):
    """A solver answer failed exact post-hoc verification."""


class ConstructionInapplicable(LatDeckError, ValueError):
    """An adversarial construction's hypothesis does not hold for the input."""
