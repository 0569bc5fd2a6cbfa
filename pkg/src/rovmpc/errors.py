"""Shared exception types."""


class ConfigError(ValueError):
    """Raised for invalid configuration: bad JSON, unknown keys, out-of-range
    values, or structurally invalid problems handed to the solver."""
