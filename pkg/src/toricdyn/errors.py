"""Error types mapped to CLI exit codes (config=2, resource=3, numerical=4)."""


class ConfigError(ValueError):
    """Invalid configuration or arguments."""


class ResourceLimitError(RuntimeError):
    """Requested problem size exceeds the configured memory budget."""


class NumericalError(RuntimeError):
    """Numerical failure (NaN, trace drift, lost Hermiticity)."""
