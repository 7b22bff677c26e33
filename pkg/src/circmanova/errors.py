"""Exception hierarchy shared by all modules.

``DataError`` and its subclasses describe bad user input (CLI exit code 2);
``NumericError`` and its subclasses describe numerical failures (exit code 3).
"""


class CircManovaError(Exception):
    """Base class for every error raised by this package."""


class DataError(CircManovaError, ValueError):
    """Invalid input data, parameters or configuration."""


class InvalidDimensionError(DataError):
    pass


class InsufficientSampleError(DataError):
    pass


class UnsupportedParityError(DataError):
    pass


class UnsupportedDesignError(DataError):
    pass


class ConfigurationError(DataError):
    pass


class PairingError(ConfigurationError):
    pass


class DomainError(DataError):
    pass


class EmptyRequestError(DataError):
    pass


class NumericError(CircManovaError, ArithmeticError):
    """A computation failed to reach its accuracy or validity contract."""


class DegenerateScatterError(NumericError):
    pass


class EstimationDegenerateError(NumericError):
    pass


class RepresentationError(NumericError):
    pass


class PrecisionError(NumericError):
    pass
