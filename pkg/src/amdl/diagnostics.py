"""Diagnostics shared by all analyses and the frontend.

Every rule violation is reported as a Diagnostic with a stable code so
golden files and CI greps stay meaningful across releases.
"""

from __future__ import annotations

from dataclasses import dataclass, field


ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """One finding: severity, stable rule code, element path, message.

    `path` is a dotted element path into the model ("Engine.troc.rate");
    `line` is a 1-based source line when the finding maps to a file.
    """

    severity: str
    code: str
    path: str
    message: str
    line: int | None = None

    def format(self) -> str:
        loc = f" (line {self.line})" if self.line is not None else ""
        return f"{self.severity} {self.code} {self.path}: {self.message}{loc}"


def error(code: str, path: str, message: str, line: int | None = None) -> Diagnostic:
    return Diagnostic(ERROR, code, path, message, line)


def warning(code: str, path: str, message: str, line: int | None = None) -> Diagnostic:
    return Diagnostic(WARNING, code, path, message, line)


def has_errors(diags: list[Diagnostic]) -> bool:
    return any(d.severity == ERROR for d in diags)


def format_all(diags: list[Diagnostic]) -> str:
    return "\n".join(d.format() for d in diags)


@dataclass
class DiagnosticSink:
    """Accumulator used by analyses that report more than one finding."""

    items: list[Diagnostic] = field(default_factory=list)

    def error(self, code: str, path: str, message: str, line: int | None = None) -> None:
        self.items.append(error(code, path, message, line))

    def warning(self, code: str, path: str, message: str, line: int | None = None) -> None:
        self.items.append(warning(code, path, message, line))

    def extend(self, diags: list[Diagnostic]) -> None:
        self.items.extend(diags)

    @property
    def has_errors(self) -> bool:
        return has_errors(self.items)


class ModelError(Exception):
    """Raised by operations whose contract is to fail, not to return diagnostics."""

    def __init__(self, code: str, message: str, path: str = ""):
        super().__init__(f"{code} {path}: {message}" if path else f"{code}: {message}")
        self.code = code
        self.path = path
        self.message = message
