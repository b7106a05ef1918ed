"""Diagnostics shared by the subject, test and assertion frontends."""
from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Diagnostic:
    kind: str
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.line}:{self.col}: {self.kind}: {self.message}"


class CompileError(Exception):
    """Raised by every frontend; carries one or more diagnostics.

    The concrete subclass matches the kind of the first diagnostic.
    """

    kind = "CompileError"

    def __init__(self, diagnostics: list[Diagnostic] | Diagnostic | str, line: int = 0, col: int = 0):
        if isinstance(diagnostics, str):
            diagnostics = [Diagnostic(self.kind, line, col, diagnostics)]
        elif isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0]
        self.line, self.col = first.line, first.col
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class SourceSyntaxError(CompileError):
    kind = "SyntaxError"


class SourceTypeError(CompileError):
    kind = "TypeError"


class SourceNameError(CompileError):
    kind = "NameError"


class ArityError(CompileError):
    kind = "ArityError"


class ScopeError(CompileError):
    kind = "ScopeError"


ERROR_CLASSES = {
    cls.kind: cls
    for cls in (SourceSyntaxError, SourceTypeError, SourceNameError, ArityError, ScopeError)
}


def raise_diagnostics(diagnostics: list[Diagnostic]) -> None:
    if diagnostics:
        raise ERROR_CLASSES.get(diagnostics[0].kind, CompileError)(diagnostics)


class ConfigError(ValueError):
    """A configuration file or directory is malformed."""


class ProtocolError(ValueError):
    """A backend response does not follow the verdict/test marker protocol."""


class BackendError(RuntimeError):
    pass


class TransportError(BackendError):
    """The HTTP backend gave up after exhausting its retries."""


class ReplayMiss(BackendError):
    """The replay transcript holds no (further) response for a key."""


class BoundsExplosion(RuntimeError):
    def __init__(self, count: int, ceiling: int):
        self.count, self.ceiling = count, ceiling
        super().__init__(f"enumeration needs {count} observations, ceiling is {ceiling}; shrink the bounds")
