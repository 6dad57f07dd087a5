"""Exception types shared by the library and the CLI.

Every error carries the process exit code the CLI uses for it.
"""

from typing import Optional


class MimlabError(Exception):
    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class ValidationError(MimlabError, ValueError):
    """Input rejected before any computation ran."""

    exit_code = 2


class NumericalError(MimlabError, ArithmeticError):
    """A solver could not produce a result (no sign change, iteration cap)."""

    exit_code = 3


class InvariantViolation(MimlabError, AssertionError):
    """A verified property failed."""

    exit_code = 1
