"""Exception hierarchy shared by all dimpol modules."""


class DimpolError(Exception):
    """Base class for every error raised by this package."""


class RankDeficient(DimpolError):
    """Repeated-variable dimension matrix does not have full column rank."""


class UnreachableDimension(DimpolError):
    """A quantity cannot be made dimensionless with the chosen repeated variables."""


class ZeroRepeatedVariable(DimpolError):
    """A repeated variable evaluated to zero, so the scaling is not invertible."""


class NonFiniteScale(DimpolError):
    """A scale factor came out infinite, NaN or zero."""


class SignatureMismatch(DimpolError):
    pass


class NotSimilar(DimpolError):
    """Two contexts do not share the same dimensionless context."""

    def __init__(self, message, c_star_a=None, c_star_b=None):
        super().__init__(message)
        self.c_star_a = c_star_a
        self.c_star_b = c_star_b


class OutOfDomain(DimpolError):
    pass


class NonFiniteDynamics(DimpolError):
    pass


class DomainError(DimpolError, ValueError):
    """Invalid (e.g. nonpositive) parameter passed to an analytic formula."""


class PolicyUndefined(DimpolError):
    """Raised when a solve is asked for zero iterations."""
