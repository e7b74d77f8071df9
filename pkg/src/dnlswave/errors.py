"""Exception hierarchy shared by all solver modules."""


class DNLSError(Exception):
    """Base class for every error raised by the package."""


class InvalidPotential(DNLSError, ValueError):
    pass


class NonPositiveFrequency(DNLSError, ValueError):
    """Psi'(u_inf^2) <= 0, so no positive frequency normalization exists."""


class OutOfDomain(DNLSError, ValueError):
    pass


class NonFiniteValue(DNLSError, FloatingPointError):
    """An iterate became inf/nan; usually the time step is too large."""


class NotConverged(DNLSError, RuntimeError):
    pass


class NoExponentialTail(DNLSError, ValueError):
    """F''(1) <= 0: the tails (if any) are algebraic, not exponential."""


class DegenerateTail(DNLSError, ValueError):
    pass


class WindowTooSmall(DNLSError, ValueError):
    pass


class NoPlateauCandidates(DNLSError, ValueError):
    pass


class QuadratureFailure(DNLSError, RuntimeError):
    pass


class HypothesisViolated(DNLSError, ValueError):
    pass


class WindowNotCovered(DNLSError, ValueError):
    pass


class ConfigError(DNLSError, ValueError):
    pass
