from __future__ import annotations

from typing import Optional


class OpacityError(Exception):
    """Base class for every error raised by this package."""


class UnknownVariableError(OpacityError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class MissingParameterError(OpacityError):
    pass


class MultiVariableError(OpacityError):
    pass


class ModelError(OpacityError):
    """A model is structurally invalid (unknown symbol, name collision, ...)."""


class BudgetError(OpacityError):
    pass


class ParseError(OpacityError):
    """Syntax or validation error with a source position (1-based)."""

    def __init__(self, message: str, line: int = 0, column: int = 0, source: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column
        self.source = source

    def __str__(self) -> str:
        where = f"{self.source}:" if self.source else ""
        return f"{where}{self.line}:{self.column}: {self.message}"
