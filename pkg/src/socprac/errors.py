"""Exception hierarchy shared by every part of the engine."""

from __future__ import annotations


class SocialPracticeError(Exception):
    """Base class for all engine errors."""


class UndeclaredSymbol(SocialPracticeError):
    def __init__(self, kind: str, name: str):
        super().__init__(f"undeclared {kind} {name!r}")
        self.kind = kind
        self.name = name


class UnknownAgent(SocialPracticeError):
    def __init__(self, name: str):
        super().__init__(f"unknown agent {name!r}")
        self.name = name


class EmptyGroup(SocialPracticeError):
    pass


class CapabilityError(SocialPracticeError):
    """An event names a performer that lacks the capability for its action."""


class Unachievable(SocialPracticeError):
    def __init__(self, formula):
        shown = " & ".join(sorted(str(f) for f in formula)) or "true"
        super().__init__(f"no declared action achieves {shown}")
        self.formula = formula


class UnknownAtBound(SocialPracticeError):
    def __init__(self, bound: int):
        super().__init__(f"no witness trace within bound {bound}")
        self.bound = bound


class Diagnostic:
    """A positioned message produced by the parser or a validator."""

    __slots__ = ("severity", "message", "line", "column")

    def __init__(self, severity: str, message: str, line: int = 0, column: int = 0):
        self.severity = severity
        self.message = message
        self.line = line
        self.column = column

    def __repr__(self):
        return f"Diagnostic({self.severity!r}, {self.message!r}, {self.line}, {self.column})"

    def __str__(self):
        where = f"{self.line}:{self.column}: " if self.line else ""
        return f"{where}{self.severity}: {self.message}"

    def __eq__(self, other):
        return isinstance(other, Diagnostic) and (
            self.severity, self.message, self.line, self.column
        ) == (other.severity, other.message, other.line, other.column)

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "message": self.message,
            "line": self.line,
            "column": self.column,
        }


class DslSyntaxError(SocialPracticeError):
    def __init__(self, message: str, line: int, column: int, expected=()):
        self.message = message
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        text = f"{line}:{column}: {message}"
        if self.expected:
            text += " (expected " + ", ".join(self.expected) + ")"
        super().__init__(text)
        self.diagnostics = [Diagnostic("error", message, line, column)]


class ValidationError(SocialPracticeError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))
