"""Exception types shared across the package."""


class MimocapError(Exception):
    """Base class for all mimocap errors."""


class NotHermitianError(MimocapError, ValueError):
    """Matrix deviates from Hermitian symmetry beyond tolerance."""


class IndefiniteInputError(MimocapError, ValueError):
    """Matrix required to be positive semidefinite has a negative eigenvalue."""


class CholeskyBreakdownError(MimocapError, ArithmeticError):
    """Cholesky factorization hit a non-positive pivot."""


class InvalidProfileError(MimocapError, ValueError):
    """Correlation profile parameters are out of range."""


class DimensionMismatchError(MimocapError, ValueError):
    """Operand dimensions are inconsistent."""


class PowerBudgetExceededError(MimocapError, ValueError):
    """Power allocation exceeds its transmit power budget."""


class NoPositiveModesError(MimocapError, ValueError):
    """Water-filling requested on a spectrum with no positive eigenvalue."""


class EmptyDistributionError(MimocapError, ValueError):
    """Quantile query on an empty sample set."""


class UsageError(MimocapError):
    """Command line arguments or config file entries are invalid."""
