"""Exception types shared across the pipeline stages."""

from __future__ import annotations


class RiskmapError(Exception):
    """Base class for all riskmap errors."""


class ConfigError(RiskmapError):
    """Invalid or inconsistent configuration."""


class CdrParseError(RiskmapError):
    """Malformed CDR input in strict mode, or an unreadable stream."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class AntennaFileError(RiskmapError):
    """Malformed antenna registry file."""


class ZoneError(RiskmapError):
    """Invalid endemic zone geometry."""


class ConsistencyError(RiskmapError):
    """Cross-stage inputs disagree, e.g. a home antenna missing from the registry."""
