"""Exception types shared across the package.

The CLI maps these onto exit codes: ConfigError -> 2, NumericalError -> 3,
InsufficientDataError -> 4.
"""


class QlsimError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(QlsimError):
    """Invalid, inconsistent, or incomplete configuration."""


class DomainError(QlsimError, ValueError):
    """An argument is outside the physically meaningful domain."""


class NumericalError(QlsimError):
    """A numerical routine failed to meet its tolerance or converge."""


class InstabilityError(NumericalError):
    """Trap configuration does not support a stable crystal."""

    def __init__(self, direction: str, message: str = ""):
        self.direction = direction
        super().__init__(message or f"unstable confinement along {direction}")


class OutOfRangeError(DomainError):
    """A root/inversion target lies outside the searchable bracket."""


class FringeInconsistencyError(DomainError):
    """Phase-scan counts are inconsistent with a sinusoidal fringe."""


class DegenerateContrastError(DomainError):
    """Fringe contrast is zero or negative; detuning is unrecoverable."""


class DegenerateFitError(DomainError):
    """Design matrix is rank deficient (e.g. all abscissae equal)."""


class SignConventionError(DomainError):
    """Inputs violate the documented sign convention (e.g. inferred B <= 0)."""


class PrecisionError(NumericalError):
    """A result cannot be represented at the required resolution."""


class InsufficientDataError(QlsimError):
    """Not enough data points for the requested analysis."""
