"""Shared exception types."""


class SingletSimError(Exception):
    """Base class for all library errors."""


class NearZeroSingletWeight(SingletSimError):
    """The state has negligible overlap with the charge-singlet sector.

    Raised when Tr(rho K) falls below the degeneracy threshold, in which
    case the projected expectation value would be a ratio of two
    near-zeros and is meaningless.
    """


class NonProjector(SingletSimError):
    """A group average failed the idempotence check.

    Signals that the supplied representation matrices are not closed
    under the group product.
    """


class FitDiverged(SingletSimError):
    """A curve fit ended with residuals too large to be trusted."""
