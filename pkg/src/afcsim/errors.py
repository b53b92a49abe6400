"""Exception hierarchy shared by all modules."""

from __future__ import annotations

from typing import Any


class AfcSimError(Exception):
    """Base class for errors raised by afcsim."""


class ConfigError(AfcSimError, ValueError):
    """Invalid model or run configuration."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class PreconditionError(AfcSimError, ValueError):
    """An operation was applied to a state that violates its precondition."""


class DegenerateStateError(AfcSimError, ArithmeticError):
    """A state (or projected branch set) has zero norm."""


class RetryExhaustedError(AfcSimError, RuntimeError):
    """The AFC retry cap was reached without an error-free attempt.

    ``state`` holds the input restored by the last detected error and
    ``attempts`` the number of attempts consumed.
    """

    def __init__(self, message: str, state: Any, attempts: int, t_end: float):
        super().__init__(message)
        self.state = state
        self.attempts = attempts
        self.t_end = t_end


class ConvergenceError(AfcSimError, RuntimeError):
    """Purification hit its step cap before reaching the target fidelity."""

    def __init__(self, message: str, trajectory: Any):
        super().__init__(message)
        self.trajectory = trajectory


class ConfigParseError(ConfigError):
    """Malformed config text; ``line`` and ``column`` are 1-based."""

    def __init__(self, message: str, line: int | None, column: int | None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class OutputError(AfcSimError, OSError):
    """Writing a report failed; ``path`` names the file."""

    def __init__(self, message: str, path: str):
        super().__init__(f"{path}: {message}")
        self.path = path
