"""
kopcheck Contracts - errors and exit codes.

This module provides:
- ExitStatus: process exit codes shared by every command
- KopError: base class for all kopcheck failures
- InputError: structured, optionally line-anchored input failure
- FormulaSyntaxError: formula text that does not parse
- BudgetExceeded: run enumeration exceeded the configured budget
- build_error: structured error object for machine-readable output

INVARIANTS:
- Exit codes are disjoint and exhaustive
- Every error raised for bad input is an InputError (exit 3)
- Resource exhaustion is never silent (exit 4)
"""

from enum import IntEnum
from typing import Any


# =============================================================================
# ExitStatus - FROZEN
# =============================================================================


class ExitStatus(IntEnum):
    """Process exit codes."""

    HOLDS = 0
    FAILS = 1
    HYPOTHESIS_FAILED = 2
    INPUT_ERROR = 3
    BUDGET_EXCEEDED = 4


# =============================================================================
# Errors
# =============================================================================


class KopError(Exception):
    """Base class for kopcheck failures."""


class InputError(KopError):
    """
    Raised when input violates a precondition or a kernel invariant.

    Attributes:
        message: Human-readable description
        line: 1-based line in a system document, if known
        detail: Optional structured context (agent, point, ...)
    """

    def __init__(
        self,
        message: str,
        line: int | None = None,
        detail: dict[str, Any] | None = None,
    ):
        self.message = message
        self.line = line
        self.detail = detail or {}
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)

    def at_line(self, line: int) -> "InputError":
        """Return a copy of this error anchored at a document line."""
        return type(self)(self.message, line=line, detail=self.detail)


class FormulaSyntaxError(InputError):
    """Raised when formula text does not parse."""

    def __init__(self, message: str, text: str, column: int):
        self.text = text
        self.column = column
        super().__init__(
            f"{message} at column {column + 1}: {text!r}",
            detail={"column": column},
        )

    def at_line(self, line: int) -> InputError:
        return InputError(self.message, line=line, detail=self.detail)


class BudgetExceeded(KopError):
    """
    Raised when run enumeration would exceed the configured budget.

    Attributes:
        budget: Configured maximum number of runs
        bound: Number of runs reached (or computed) when the budget tripped
        time: Round at which enumeration stopped
    """

    def __init__(self, budget: int, bound: int, time: int):
        self.budget = budget
        self.bound = bound
        self.time = time
        super().__init__(
            f"run budget exceeded: {bound} runs at time {time} (budget {budget})"
        )


def build_error(
    code: str,
    message: str,
    detail: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """
    Build a structured error object.

    Args:
        code: Error code (e.g., "INPUT_ERROR", "BUDGET_EXCEEDED")
        message: Human-readable error message
        detail: Optional additional details

    Returns:
        Structured error dictionary.
    """
    error: dict[str, Any] = {"code": code, "message": message}
    if detail:
        error["detail"] = detail
    return error
