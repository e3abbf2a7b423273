"""Exception hierarchy shared by every horizonlab module."""


class HorizonLabError(Exception):
    """Base class for all errors raised by horizonlab."""


class NonPositiveLambda(HorizonLabError):
    """The cosmological constant is not positive."""


class DegenerateRoots(HorizonLabError):
    """Two lapse roots coincide but the parameters sit on no known degenerate curve."""


class ChargeTooLarge(HorizonLabError):
    """4 Lambda Q^2 exceeds one, so the critical radii are complex."""


class RegimeError(HorizonLabError):
    """An operation was asked for a regime it does not support."""


class OutOfDomain(HorizonLabError):
    """A radius or arc-length coordinate lies outside the admissible interval."""


class EventNotFound(HorizonLabError):
    """The turning point u' = 0 was not reached before the integration horizon."""


class NotAHorizonBoundary(HorizonLabError):
    """A region boundary slice is not a zero of the potential."""


class ChargeBoundViolated(HorizonLabError):
    """Q^2 > 9 / (4 Lambda); the area interval is empty."""


class EmbeddingLost(HorizonLabError):
    """A graphical perturbation is too large to stay an embedded graph over the slices."""


class IndexClaimViolated(HorizonLabError):
    """The cosmological horizon was found with Morse index different from one."""


class ConfigError(HorizonLabError):
    """Invalid command-line or file configuration."""
