"""Error types shared across the package.

ConfigurationError covers invalid static inputs (basin/env/optimizer
configuration, malformed files); UsageError covers invalid calls against a
valid configuration (wrong dimensions, stepping a finished episode). The CLI
maps both to exit code 2; anything else is an internal error (exit code 1).
"""


class ConfigurationError(ValueError):
    """A configuration value or file violates a documented constraint."""


class UsageError(ValueError):
    """An operation was called in a way its contract does not allow."""
