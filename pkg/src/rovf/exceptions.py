"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Operands live in Hilbert spaces of different dimension."""


class NotSymmetricError(ValueError):
    pass


class NotFiniteError(ValueError):
    pass


class SpectralError(RuntimeError):
    """The eigensolver failed or produced a decomposition that does not reconstruct."""


class NotPositiveContractionError(ValueError):
    pass


class RankDeficientError(ValueError):
    pass


class InvalidSpecError(ValueError):
    pass


class NotExactError(TypeError):
    """Requested an exact expectation for a sampler that only supports Monte Carlo."""


class CoercivityError(ValueError):
    """The coercivity constant is not positive, so no convergence guarantee exists."""


class EnumerationBudgetError(ValueError):
    pass


class InconsistentSystemError(ValueError):
    pass
