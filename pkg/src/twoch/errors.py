"""Exception types shared across the package."""


class TwochError(Exception):
    """Base class for all package errors."""


class ConfigurationError(TwochError):
    """Invalid grid, data-family, or experiment configuration."""


class NumericalError(TwochError):
    """NaN/inf, CFL violation, or other runtime numerical failure."""
