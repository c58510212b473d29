from __future__ import annotations

from typing import Any, Optional


class LabError(Exception):
    """Base class; `exit_code` is what the CLI returns for it."""

    exit_code: int = 1


class MachineSchemaError(LabError):
    exit_code = 2

    def __init__(self, message: str, position: Optional[str] = None):
        self.position = position
        if position:
            message = f"{position}: {message}"
        super().__init__(message)


class MachineValidationError(LabError):
    exit_code = 2

    def __init__(self, message: str, report: Any = None):
        self.report = report
        super().__init__(message)


class UnknownSymbolError(LabError, KeyError):
    exit_code = 2

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown symbol"


class UnknownStateError(LabError, KeyError):
    exit_code = 2

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown state"


class InconsistentWordError(LabError):
    exit_code = 2


class ParameterError(LabError, ValueError):
    exit_code = 2


class InvariantError(LabError):
    exit_code = 3


class ConvergenceError(InvariantError):
    pass


class SingularOverlapError(InvariantError):
    pass


class RatioUndefinedError(InvariantError):
    pass


class ResourceCapError(LabError):
    exit_code = 4
