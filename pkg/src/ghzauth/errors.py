"""Exception hierarchy shared by every layer of the simulator."""


class GhzAuthError(Exception):
    """Base class for all simulator errors."""


class InvalidArgument(GhzAuthError, ValueError):
    """An operation was called outside its precondition."""


class InvalidConfig(GhzAuthError, ValueError):
    """A session or CLI configuration violates its constraints."""


class CapacityError(GhzAuthError):
    """A finite resource (counter space, unconsumed GHZ states) ran out."""


class InternalError(GhzAuthError, RuntimeError):
    """A state that should be unreachable by construction was reached."""
