"""Exception types shared across the package."""


class RoomdecayError(Exception):
    """Base class for all package errors."""


class ValidationError(RoomdecayError):
    """Invalid input data: malformed files, out-of-range values, bad shapes."""


class ConfigError(RoomdecayError):
    """Impossible or inconsistent configuration (e.g. exhausted sampler budget)."""


class NumericError(RoomdecayError):
    """Numerically undefined operation (e.g. all-zero impulse response)."""
