from __future__ import annotations


class MonoFilterError(Exception):
    """Base class for every error raised by the package."""


class DataError(MonoFilterError, ValueError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        super().__init__(f"row {row}: {message}" if row is not None else message)


class SchemaMismatchError(DataError):
    pass


class ConfigError(MonoFilterError, ValueError):
    pass


class UsageError(MonoFilterError):
    pass
