class ConfigError(ValueError):
    """Invalid run configuration or input data."""


class PreconditionError(ValueError):
    """An operation was called on data outside its domain of validity."""


class CorruptStateError(FloatingPointError):
    """A field picked up NaN or Inf values."""
