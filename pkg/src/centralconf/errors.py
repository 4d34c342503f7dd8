"""Exception types shared across the package."""


class CollisionError(ValueError):
    """Two bodies coincide (or are closer than the collision tolerance)."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class DegenerateConfigurationError(ValueError):
    """All bodies sit at the center of mass, so the configuration has no scale."""


class NotACocycleError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    """A solver stopped without meeting its residual tolerance.

    The best iterate seen so far is attached as ``best`` (a configuration
    array) together with its residual norm, so callers can inspect or restart.
    """

    def __init__(self, message, best=None, residual_norm=None, iterations=0):
        super().__init__(message)
        self.best = best
        self.residual_norm = residual_norm
        self.iterations = iterations
