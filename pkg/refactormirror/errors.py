from __future__ import annotations

from typing import TYPE_CHECKING, Sequence

if TYPE_CHECKING:
    from .ast_nodes import Span
    from .refactorings import PreconditionViolation


class RefactorMirrorError(Exception):
    """Base class for every error raised by refactormirror."""


class SourceSyntaxError(RefactorMirrorError):
    """Raised when a document cannot be lexed or parsed (unbalanced structure, bad tokens)."""

    def __init__(self, span: "Span", message: str):
        self.span = span
        self.message = message
        super().__init__(f"line {span.start_line}: {message}")


class UnknownNode(RefactorMirrorError):
    """Raised when a node id does not belong to the unit."""


class UnknownEntity(RefactorMirrorError):
    """Raised when refactoring parameters point at entities missing from the unit."""


class PreconditionFailed(RefactorMirrorError):
    """Raised when apply() is called on an instance whose check() is not empty."""

    def __init__(self, violations: Sequence["PreconditionViolation"]):
        self.violations = list(violations)
        rules = ", ".join(v.rule_id for v in self.violations)
        super().__init__(f"precondition failed: {rules}")


class UnsupportedKind(RefactorMirrorError):
    """Raised for refactoring kinds the engine cannot perform."""


class NotInvertible(RefactorMirrorError):
    """Raised when a refactoring has no lossless inverse."""


class EmptySet(RefactorMirrorError):
    """Raised when a tolerance score is requested over an empty statement set."""


class KindMismatch(RefactorMirrorError):
    """Raised when comparing refactorings of different kinds."""


class DegenerateInput(RefactorMirrorError):
    """Raised when a statistic is undefined for the given sample."""


class MissingField(RefactorMirrorError):
    """Raised when a prompt spec lacks a field its template needs."""


class ProviderError(RefactorMirrorError):
    """Raised when the chat-completion provider fails (network, auth, missing replay)."""


class NoCodeInResponse(RefactorMirrorError):
    """Raised when an LLM response holds no fenced code block."""


class UnknownSubcategory(RefactorMirrorError, KeyError):
    """Raised when a subcategory key is not in the registry."""
