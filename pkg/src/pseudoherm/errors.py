"""Exception types raised by the toolkit.

Each numerical failure mode gets its own class so the CLI can map it onto
an exit code and tests can assert on the precise failure.
"""


class PseudoHermError(Exception):
    """Base class for every error raised by this package."""


class InvalidTruncationError(PseudoHermError, ValueError):
    """Fock-space cutoff or interior block size is out of range."""


class BasisMismatchError(PseudoHermError, ValueError):
    """Operators live on incompatible truncated bases."""


class ParameterError(PseudoHermError, ValueError):
    """Model or noncommutative parameters violate their guards."""


class NumericalError(PseudoHermError):
    """Base for failures of the numerical linear algebra."""


class NearDefectiveMatrixError(NumericalError):
    """Eigenvector matrix too ill-conditioned for spectral calculus."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class SpectrumNotIntegerError(NumericalError):
    """An eigenvalue that must be an integer is not (within tolerance)."""

    def __init__(self, message, worst=None):
        super().__init__(message)
        self.worst = worst


class MetricNotPositiveError(NumericalError):
    """The metric has a non-positive eigenvalue on the interior block."""


class ScalingFailureError(NumericalError):
    """Matrix exponential overflowed or produced non-finite entries."""


class AnnihilationResidualError(NumericalError):
    """The computed ground state is not annihilated by the ladder operators."""


class InsufficientQuadratureError(NumericalError):
    """Doubling the quadrature nodes moved the result past tolerance."""
