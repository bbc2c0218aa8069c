"""Exception types raised across the package."""


class InvalidArgument(ValueError):
    """Bad input: wrong grid size, non-finite samples, out-of-range parameter."""


class AliasingError(RuntimeError):
    """Too much spectral mass near the resolution limit of the grid."""


class MonotonicityError(ValueError):
    """A lift that should be strictly increasing is not."""


class DegenerateDerivativeError(ValueError):
    """The derivative of a circle map vanishes somewhere on the grid."""


class BranchError(RuntimeError):
    """A logarithm branch could not be tracked continuously."""


class PreconditionError(ValueError):
    """Inputs are individually valid but violate a joint requirement."""


class StepSizeError(RuntimeError):
    """Finite differences did not converge under step halving."""
