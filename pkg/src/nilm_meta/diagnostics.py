"""Diagnostics, validation reports and the error type shared by every module.

Diagnostic codes form a stable namespace (``E-...`` for errors, ``W-...`` for
warnings) so that callers and tests can match on codes instead of message
text.  The full list lives in the README.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Span:
    file: str
    line: int
    column: int = 0

    def __str__(self) -> str:
        return f"{self.file}:{self.line}"


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    code: str
    path: str
    message: str
    span: Optional[Span] = field(default=None, compare=False)

    @property
    def is_error(self) -> bool:
        return self.severity == ERROR

    def to_json(self) -> dict:
        return {
            "severity": self.severity,
            "code": self.code,
            "path": self.path,
            "message": self.message,
            "file": self.span.file if self.span else None,
            "line": self.span.line if self.span else None,
        }

    def to_text(self) -> str:
        where = f" ({self.span})" if self.span else ""
        return f"{self.severity.upper()} {self.code} {self.path or '/'} — {self.message}{where}"


def error(code: str, path: str, message: str, span: Optional[Span] = None) -> Diagnostic:
    return Diagnostic(ERROR, code, path, message, span)


def warning(code: str, path: str, message: str, span: Optional[Span] = None) -> Diagnostic:
    return Diagnostic(WARNING, code, path, message, span)


def join_path(*parts) -> str:
    return "/".join(str(p) for p in parts if p is not None and p != "")


class MetadataError(Exception):
    """Raised for faults that stop an operation (parse failures, unknown names).

    ``diagnostics`` holds every finding that led to the fault; the first one
    provides ``code`` and ``path``.
    """

    def __init__(self, code: str, message: str, path: str = "",
                 span: Optional[Span] = None,
                 diagnostics: Iterable[Diagnostic] = ()):
        self.diagnostics = tuple(diagnostics) or (error(code, path, message, span),)
        first = self.diagnostics[0]
        self.code = first.code
        self.path = first.path
        self.span = first.span
        super().__init__(message if not span else f"{message} ({span})")

    @classmethod
    def from_diagnostics(cls, diagnostics: Iterable[Diagnostic]) -> "MetadataError":
        diagnostics = tuple(diagnostics)
        first = diagnostics[0]
        extra = f" (+{len(diagnostics) - 1} more)" if len(diagnostics) > 1 else ""
        return cls(first.code, first.message + extra, first.path, first.span, diagnostics)


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...] = ()

    @property
    def errors(self) -> int:
        return sum(1 for d in self.diagnostics if d.is_error)

    @property
    def warnings(self) -> int:
        return len(self.diagnostics) - self.errors

    @property
    def valid(self) -> bool:
        return self.errors == 0

    def codes(self, severity: Optional[str] = None) -> list[str]:
        return [d.code for d in self.diagnostics if severity is None or d.severity == severity]

    def strict(self) -> "ValidationReport":
        """Copy of the report with every warning promoted to an error."""
        return ValidationReport(tuple(replace(d, severity=ERROR) for d in self.diagnostics))

    def to_text(self) -> str:
        lines = [d.to_text() for d in self.diagnostics]
        lines.append(f"{self.errors} errors, {self.warnings} warnings")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "valid": self.valid,
            "errors": self.errors,
            "warnings": self.warnings,
            "diagnostics": [d.to_json() for d in self.diagnostics],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
