"""Positioned error reporting shared by every stage of the toolchain."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NoReturn


@dataclass(frozen=True)
class Diagnostic:
    file: str
    line: int
    col: int
    message: str

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.col}: {self.message}"


class CompileError(Exception):
    """Raised when a stage rejects its input.

    Carries one or more diagnostics; str() renders them one per line so a
    driver can dump the whole batch to stderr unchanged.
    """

    def __init__(self, diagnostics: Diagnostic | Iterable[Diagnostic]):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = (diagnostics,)
        self.diagnostics: tuple[Diagnostic, ...] = tuple(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


def fail(file: str, line: int, col: int, message: str) -> NoReturn:
    raise CompileError(Diagnostic(file, line, col, message))
