"""Exception types shared across the package."""


class NetMLEError(Exception):
    """Base class for all package errors."""


class DomainError(NetMLEError, ValueError):
    """An argument lies outside the domain where an operation is defined."""


class DimensionError(NetMLEError, ValueError):
    """Matrices or labelings with incompatible node counts were combined."""


class DivergenceInfiniteError(NetMLEError, ArithmeticError):
    """A Kullback-Leibler term is infinite (reference probability in {0, 1})."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class BudgetExceededError(NetMLEError, RuntimeError):
    """Exhaustive enumeration would exceed the configured budget."""


class DegenerateSampleError(NetMLEError, ValueError):
    """The sample carries no information (e.g. no observed edge)."""


class ConfigError(NetMLEError, ValueError):
    """An experiment or CLI configuration is invalid."""
