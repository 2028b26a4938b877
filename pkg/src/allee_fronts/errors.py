from __future__ import annotations


class AlleeFrontsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(AlleeFrontsError, ValueError):
    pass


class ConfigError(AlleeFrontsError, ValueError):
    pass


class InsufficientDataError(AlleeFrontsError, ValueError):
    pass


class UnsupportedProfileError(AlleeFrontsError, TypeError):
    pass


class FitError(AlleeFrontsError, ValueError):
    pass


class ConstructionError(AlleeFrontsError, RuntimeError):
    """A constant recipe could not be completed; usually a hypothesis is violated."""


class PastBlowupError(AlleeFrontsError, ValueError):
    def __init__(self, message: str, horizon: float):
        super().__init__(message)
        self.horizon = horizon


class NumericalStabilityError(AlleeFrontsError, RuntimeError):
    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class ResourceError(AlleeFrontsError, MemoryError):
    pass
