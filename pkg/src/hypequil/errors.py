"""Exception types shared across the package."""


class HypequilError(Exception):
    """Base class for all package-specific errors."""


class InputError(HypequilError, ValueError):
    """An argument violates a documented precondition."""


class InvariantViolation(HypequilError):
    """A value claiming a geometric invariant does not satisfy it."""


class ConvergenceError(HypequilError):
    """An iterative routine ran out of iterations.

    Carries the best iterate found so far in ``best`` when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class NoCertificateError(HypequilError):
    """A solve finished but its grid certificate exceeded the allowance.

    Signals either insufficient grid resolution or an invalid bifunction.
    """

    def __init__(self, message, best=None, merit=None, allowance=None):
        super().__init__(message)
        self.best = best
        self.merit = merit
        self.allowance = allowance


class SamplingError(HypequilError):
    """Rejection sampling acceptance rate collapsed."""


class DegenerateRegionError(HypequilError):
    """A region produced no grid points at the requested resolution."""


class ConfigError(HypequilError, ValueError):
    """Experiment configuration is malformed; message names the bad path."""
