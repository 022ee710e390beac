"""
Exception types raised by autocp.

Each error also derives from the builtin a caller would naturally catch, so
``except ValueError`` keeps working for input problems.
"""


class AutoCPError(Exception):
    """Base class for all autocp errors."""


class DatasetError(AutoCPError, ValueError):
    """Raised for unreadable, malformed or degenerate datasets."""


class ConfigError(AutoCPError, ValueError):
    """Raised when a run configuration is invalid."""


class HeadUnavailableError(AutoCPError, ValueError):
    """Raised when a prediction head was requested that the model never fitted."""


class CalibrationError(AutoCPError, ValueError):
    """Raised when a calibration scheme cannot be built from the given data."""


class GPNumericalError(AutoCPError, RuntimeError):
    """Raised when the GP covariance cannot be factorised or yields a negative variance."""


class SearchError(AutoCPError, RuntimeError):
    """Raised when the pipeline search cannot produce a usable pipeline."""


class CateError(AutoCPError, ValueError):
    """Raised for invalid treatment-effect inputs."""


class BackendUnavailableError(AutoCPError, ImportError):
    """Raised when a learner family's optional package is not installed."""
