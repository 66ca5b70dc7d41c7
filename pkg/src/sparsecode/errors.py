"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A scalar argument is outside its documented range."""


class ShapeError(ValueError):
    """Array arguments have inconsistent dimensions."""


class DomainError(ValueError):
    """A point lies outside the domain a function is defined on."""


class DegenerateProjectionError(ValueError):
    """The nearest-point projection is undefined for this input."""


class CalibrationError(ValueError):
    """Threshold calibration was requested with too few samples."""


class FitError(RuntimeError):
    """Not enough usable points for a log-log slope fit."""


class ConfigError(ValueError):
    """An experiment configuration failed validation."""
