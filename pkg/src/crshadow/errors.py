"""Exception types raised across the package."""


class CrShadowError(Exception):
    """Base class for all package errors."""


class ConfigError(CrShadowError):
    """Malformed or inconsistent scenario configuration."""


class DomainError(CrShadowError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class DegenerateDistributionError(DomainError):
    """Moments describe a zero-variance distribution."""


class ConvergenceError(CrShadowError):
    """A root finder failed to reach its tolerance."""


class ConsistencyError(CrShadowError):
    """Internal numerical result violated a guaranteed bound."""
