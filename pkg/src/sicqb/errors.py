"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Two objects that must share a dimension do not."""


class NormalizationError(ValueError):
    def __init__(self, norm: float, message: str | None = None):
        self.norm = norm
        super().__init__(message or f"vector is not normalized: norm = {norm!r}")


class NotHermitianError(ValueError):
    """Matrix fails the Hermiticity invariant."""


class InvalidStateError(ValueError):
    """Operator or probability vector is not a valid quantum state.

    ``min_eigenvalue`` carries the offending eigenvalue when the failure is a
    positivity violation, otherwise it is ``None``.
    """

    def __init__(self, message: str, min_eigenvalue: float | None = None):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(message)


class CapacityError(ValueError):
    """Requested tensor power exceeds the dense-storage cap."""
