"""Diagnostics shared by every pipeline stage."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Pos:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOPOS = Pos(0, 0)


class LqcError(Exception):
    """A user-facing rejection.  ``kind`` is the stable error-class name."""

    stage = "error"

    def __init__(self, kind: str, message: str, pos: Pos | None = None):
        super().__init__(message)
        self.kind = kind
        self.message = message
        self.pos = pos

    def render(self, filename: str = "<input>") -> str:
        pos = self.pos or NOPOS
        return f"{filename}:{pos.line}:{pos.col}: {self.kind}: {self.message}"


class ParseError(LqcError):
    stage = "parse"

    def __init__(self, message: str, pos: Pos | None = None, expected: tuple[str, ...] = ()):
        if expected:
            message = f"{message} (expected {', '.join(expected)})"
        super().__init__("ParseError", message, pos)
        self.expected = expected


class TypeCheckError(LqcError):
    stage = "type"


class LinearityError(LqcError):
    stage = "usage"


class SolveError(LqcError):
    stage = "solve"

    def __init__(self, kind: str, message: str, atoms: tuple = (), pos: Pos | None = None, site: str | None = None):
        super().__init__(kind, message, pos)
        self.atoms = atoms
        self.site = site


class LintError(LqcError):
    stage = "lint"


class RuntimeFault(LqcError):
    stage = "runtime"


class InternalError(Exception):
    """A broken invariant between stages, never a user error."""
