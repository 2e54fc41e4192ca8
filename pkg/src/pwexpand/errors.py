"""Shared exception types.

Every error raised deliberately by this package derives from ToolError;
the CLI maps any ToolError to exit code 1 (usage errors are 2).
"""


class ToolError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(ToolError):
    """Malformed map-config document or invalid run configuration."""
