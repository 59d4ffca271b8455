"""Diagnostics shared by the parser and validator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple


class ParseError(Exception):
    """Syntax error with position and, when known, the expected tokens."""

    def __init__(self, line: int, col: int, message: str, expected: Tuple[str, ...] = ()):
        self.line = line
        self.col = col
        self.message = message
        self.expected = tuple(sorted(set(expected)))
        suffix = f" (expected {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: ParseError: {message}{suffix}")

    def diagnostic(self) -> str:
        return f"{self.line}:{self.col}: ParseError: {self.message}"


@dataclass(frozen=True)
class ValidationError:
    code: str
    message: str
    span: Tuple[int, int] = field(default=(0, 0))

    def diagnostic(self) -> str:
        return f"{self.span[0]}:{self.span[1]}: {self.code}: {self.message}"
