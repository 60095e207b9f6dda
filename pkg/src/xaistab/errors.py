"""Exception types shared across the package."""


class XaiStabError(Exception):
    """Base class for all package errors."""


class ConfigurationError(XaiStabError, ValueError):
    """Invalid or inconsistent configuration, raised before any work starts."""


class DomainError(XaiStabError, ValueError):
    """An argument lies outside the domain of an operation."""


class GenerationError(XaiStabError, RuntimeError):
    """Synthetic scene generation could not satisfy its constraints."""


class InconsistencyError(XaiStabError, RuntimeError):
    """Internal data disagrees with itself (e.g. mask vs. counts)."""
