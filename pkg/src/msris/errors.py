"""Exception types raised across the package."""


class MsrisError(Exception):
    """Base class for all package errors."""


class DomainError(MsrisError, ValueError):
    """An argument lies outside the domain of the operation."""


class ConstraintViolation(MsrisError, ValueError):
    """A RIS configuration breaks an amplitude constraint.

    Attributes
    ----------
    index : int
        1-based antenna index of the offending coefficient.
    """

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class ConfigError(MsrisError, ValueError):
    """An experiment or channel configuration is inconsistent."""
