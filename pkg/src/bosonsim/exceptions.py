"""Exception types shared across the package."""


class BosonSimError(Exception):
    """Base class for all package errors."""


class DimensionError(BosonSimError, ValueError):
    """Matrix or occupation dimensions are inconsistent."""


class PhotonNumberMismatchError(BosonSimError, ValueError):
    """Input and output occupations carry different photon numbers."""


class MatrixTooLargeError(BosonSimError, ValueError):
    """Matrix size exceeds a kernel's hard guard."""


class NotSubunitaryError(BosonSimError, ValueError):
    """Largest singular value exceeds 1; not a physical lossy channel."""


class EmptyDistributionError(BosonSimError, ValueError):
    """No outcomes, or all weights vanish so renormalization is impossible."""


class UndefinedVisibilityError(BosonSimError, ValueError):
    """Two-photon visibility is undefined because the distinguishable
    coincidence probability vanishes."""


class UnderdeterminedPhaseSystemError(BosonSimError, ValueError):
    """The gauge-fixed phase system has fewer independent constraints
    than unknowns."""

    def __init__(self, n_free, rank):
        self.n_free = int(n_free)
        self.rank = int(rank)
        self.deficiency = self.n_free - self.rank
        super().__init__(
            f"phase system under-determined: {self.n_free} free phases, "
            f"rank {self.rank} (missing {self.deficiency} degrees of freedom)"
        )


class ConvergenceError(BosonSimError, RuntimeError):
    """An iterative fit failed to reach the requested residual."""
