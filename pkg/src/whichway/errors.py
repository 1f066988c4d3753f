"""Exception and warning types raised by :mod:`whichway`."""


class WhichWayError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(WhichWayError, ValueError):
    """A physical parameter lies outside its admissible range."""


class ZeroNormError(WhichWayError, ValueError):
    """A vector with (numerically) vanishing norm cannot be normalised."""


class NotHermitianError(WhichWayError, ValueError):
    pass


class DarkFringeError(WhichWayError, ValueError):
    """The quantum object is never detected at the requested phase.

    Conditional probabilities and phase-dependent knowledge are undefined
    there. This only happens for visibility 1 at the interference minimum.
    """


class ConsistencyError(WhichWayError, RuntimeError):
    """Internal probability bookkeeping went wrong (total != 1)."""


class ShotStarvationError(WhichWayError, RuntimeError):
    """Too few Monte Carlo samples landed in the conditioning event."""


class ShotStarvationWarning(UserWarning):
    pass
