"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition."""


class UnsupportedExponentError(InvalidInputError):
    """Integrability exponent outside the supported range p >= 2."""


class GridTooCoarseError(InvalidInputError):
    """Grid has too few cells for the requested operation."""


class DivergenceError(RuntimeError):
    """A marching scheme produced a non-finite state."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class UniquenessError(RuntimeError):
    """Multistart roots failed to cluster to a single solution."""
