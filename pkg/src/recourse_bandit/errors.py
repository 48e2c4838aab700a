"""Shared exception types."""


class InvalidInputError(ValueError):
    """Raised when an operation receives malformed or non-finite inputs."""


class ConfigError(ValueError):
    """Raised when an experiment or session configuration is unusable."""


class DataError(ValueError):
    """Raised when a dataset cannot be ingested or fitted."""


class SchemaError(DataError):
    """Raised when a CSV file does not match its declared schema."""
