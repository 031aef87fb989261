"""Exception types shared across the package."""


class VolboundError(Exception):
    """Base class for all volbound errors."""


class InvalidConfigError(VolboundError, ValueError):
    """A configuration value (path count, step count, grid, ...) is unusable."""


class OutOfBoundsError(VolboundError, ValueError):
    """A price violates the no-arbitrage bounds required for inversion.

    Typically signals an unusable Monte Carlo estimate, e.g. deep-wing noise.
    """


class NoConvergenceError(VolboundError, RuntimeError):
    """An iterative solver failed to reach its tolerance."""


class MissingPathsError(VolboundError, ValueError):
    """An operation needs full volatility paths but the batch holds summaries only."""


class BracketFailureError(VolboundError, RuntimeError):
    """A root bracket with a sign change could not be established."""
