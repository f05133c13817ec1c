"""Exception types shared across the package."""


class OacError(Exception):
    """Base class for all library errors."""


class LengthMismatch(OacError):
    """A bit block or restriction does not have the expected length."""


class NonIntegralRate(OacError):
    """An operation requiring n*r to be an integer got a rate where it is not."""


class TooLarge(OacError):
    """The requested enumeration exceeds the configured work budget."""


class NoConvergence(OacError):
    """An iterative solver failed to reach the requested tolerance."""


class IndexOutOfRange(OacError):
    """A coset index lies outside [0 : 2^(nr))."""


class NotInPartition(OacError):
    """A codeword does not belong to the given coset partition."""


class IdentityViolation(OacError):
    """An exact counting identity or internal cross-check failed."""


class NoRootIsolation(OacError):
    """A polynomial does not isolate a single simple real root in (1, 2)."""


class LifespanOverflow(OacError):
    """A species lifespan exceeded the safety cap."""


class UnsupportedProfile(OacError):
    """The requested shift-distribution profile is not available."""
