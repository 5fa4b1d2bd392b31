"""Exception types shared across the package."""


class DataError(Exception):
    """Malformed or inconsistent input data (maps to CLI exit code 2)."""


class UsageError(Exception):
    """Bad configuration or command usage (maps to CLI exit code 1)."""
