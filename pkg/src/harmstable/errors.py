"""Exception types shared across the package."""

__all__ = [
    "HarmstableError",
    "ParameterError",
    "SingularityError",
    "ConfigError",
    "QuadratureError",
]


class HarmstableError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(HarmstableError, ValueError):
    """A parameter is outside its admissible range."""


class SingularityError(HarmstableError, ValueError):
    """A kernel was evaluated at (or integrated across) a singular point."""


class ConfigError(HarmstableError, ValueError):
    """An experiment or CLI configuration is inconsistent."""


class QuadratureError(HarmstableError, RuntimeError):
    """A quadrature produced a non-finite cell contribution."""
