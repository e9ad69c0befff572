"""Exception hierarchy shared across the package.

Every error raised by library code derives from RepSearchError so callers can
catch one base class. The CLI maps subclasses to distinct exit codes.
"""

from __future__ import annotations


class RepSearchError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(RepSearchError):
    """A file could not be parsed. Carries the path and 1-based line number."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = path if line is None else f"{path}:{line}"
            prefix += ": "
        super().__init__(prefix + message)


class SchemaError(RepSearchError):
    """Parsed data violates the documented record or file schema."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix = path if line is None else f"{path}:{line}"
            prefix += ": "
        super().__init__(prefix + message)


class BuildError(RepSearchError):
    """An index could not be built from the given inputs."""


class ConfigError(RepSearchError):
    """A configuration value is out of its documented domain."""
