"""Exception types shared across the package."""


class HfdemixError(Exception):
    """Base class for all package-specific errors."""


class DomainError(HfdemixError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class DegenerateInputError(DomainError):
    """Input is structurally degenerate (e.g. a zero channel with finite SNR)."""


class ConfigurationError(HfdemixError, ValueError):
    """A configuration value or combination of values is invalid."""


class NumericalFailure(HfdemixError, RuntimeError):
    """A numerical routine produced NaN/Inf or otherwise broke down."""
