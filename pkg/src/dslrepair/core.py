"""Shared domain types: languages, diagnostics, validation reports, scores."""

from __future__ import annotations

import enum
from dataclasses import dataclass


class Language(str, enum.Enum):
    ANSIBLE = "ansible"
    BASH = "bash"
    SQL = "sql"

    @classmethod
    def parse(cls, value: str) -> "Language":
        try:
            return cls(value.strip().lower())
        except ValueError:
            raise ValueError(f"unknown language: {value!r}") from None


# Codes that never flip a report to failed.  Everything else is
# error-severity.  Frozen: repair feedback and tests depend on these
# being byte-stable across releases.
WARNING_CODES = frozenset(
    {
        "ANS_SHELL_MODULE",
        "ANS_UNRESOLVED_VAR",
        "ANS_UNKNOWN_ARG",
        "BASH_BACKTICK_STYLE",
        "BASH_UNQUOTED_VAR",
    }
)


def is_error_code(code: str) -> bool:
    return code not in WARNING_CODES


@dataclass(frozen=True)
class Span:
    line: int  # 1-based
    column: int  # 1-based


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    span: Span | None = None

    @property
    def is_error(self) -> bool:
        return is_error_code(self.code)

    def render(self) -> str:
        if self.span is not None:
            return f"{self.code} {self.span.line}:{self.span.column} {self.message}"
        return f"{self.code} {self.message}"


@dataclass(frozen=True)
class SourceProgram:
    language: Language
    text: str
    query: str = ""
    id: str = ""


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    diagnostics: tuple[Diagnostic, ...] = ()

    @classmethod
    def from_diagnostics(cls, diagnostics) -> "ValidationReport":
        diags = tuple(diagnostics)
        return cls(passed=not any(d.is_error for d in diags), diagnostics=diags)

    @classmethod
    def ok(cls) -> "ValidationReport":
        return cls(passed=True, diagnostics=())


def render_report(report: ValidationReport) -> str:
    """Render diagnostics one per line, in order; empty string for none."""
    return "\n".join(d.render() for d in report.diagnostics)


@dataclass(frozen=True)
class SemanticScore:
    value: float

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"semantic score out of range: {self.value}")


class DslError(Exception):
    """Base for all domain errors raised by this package."""


class ParseError(DslError):
    def __init__(self, diagnostic: Diagnostic):
        super().__init__(diagnostic.render())
        self.diagnostic = diagnostic


class ScoreError(DslError):
    pass


class NormalizeError(DslError):
    pass


class InfillError(DslError):
    pass


class ResourceError(DslError):
    pass
