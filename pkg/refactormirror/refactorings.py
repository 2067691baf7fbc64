"""Refactoring instances and their per-kind parameter records."""
from __future__ import annotations

import json
from typing import Any, Literal, Optional, Type

from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from .ast_nodes import Span

RefactoringKind = Literal[
    "extract_class",
    "extract_method",
    "extract_variable",
    "inline_method",
    "inline_variable",
    "rename_attribute",
    "rename_method",
    "rename_parameter",
    "rename_variable",
]

RENAME_KINDS = ("rename_attribute", "rename_method", "rename_parameter", "rename_variable")
EXTRACT_KINDS = ("extract_class", "extract_method", "extract_variable")
INLINE_KINDS = ("inline_method", "inline_variable")
ALL_KINDS: tuple[str, ...] = RENAME_KINDS + INLINE_KINDS + EXTRACT_KINDS

# application phase inside one mirror run
PHASE = {kind: 0 for kind in RENAME_KINDS} | {kind: 1 for kind in INLINE_KINDS} | {kind: 2 for kind in EXTRACT_KINDS}


class LineSpan(BaseModel):
    model_config = ConfigDict(frozen=True)

    start_line: int
    end_line: int

    @classmethod
    def of(cls, span: Span) -> "LineSpan":
        return cls(start_line=span.start_line, end_line=span.end_line)

    def covers(self, span: Span) -> bool:
        return self.start_line == span.start_line and self.end_line == span.end_line


class _Params(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class RenameParams(_Params):
    entity: str = Field(description="class path for attributes and methods, method path for parameters and variables")
    old_name: str
    new_name: str
    declaration: LineSpan
    param_types: Optional[list[str]] = None
    ordinal: int = 0


class ExtractMethodParams(_Params):
    source_method: str
    statements: list[LineSpan]
    new_name: str
    parameters: list[str]
    arguments: list[str]
    return_variable: Optional[str] = None
    call_site: LineSpan
    modifiers: str = "private"
    throws: str = ""
    position: Optional[int] = None  # member index for the new method; default is right after the source method


class InlineMethodParams(_Params):
    method: str
    call_sites: list[LineSpan]


class ExtractVariableParams(_Params):
    method: str
    expression: str
    occurrences: list[LineSpan]
    occurrence_indices: list[int]
    new_name: str
    insertion_point: LineSpan
    type_text: str
    modifiers: str = ""


class InlineVariableParams(_Params):
    method: str
    variable: str
    declaration: LineSpan
    uses: list[LineSpan]
    ordinal: int = 0


class ExtractClassParams(_Params):
    source_class: str
    moved_fields: list[str]
    moved_methods: list[str]
    new_class: str
    delegate_field: str
    nested: bool = False


PARAM_MODELS: dict[str, Type[_Params]] = {
    "rename_attribute": RenameParams,
    "rename_method": RenameParams,
    "rename_parameter": RenameParams,
    "rename_variable": RenameParams,
    "extract_method": ExtractMethodParams,
    "inline_method": InlineMethodParams,
    "extract_variable": ExtractVariableParams,
    "inline_variable": InlineVariableParams,
    "extract_class": ExtractClassParams,
}

_SPAN_FIELDS = {"declaration", "statements", "call_site", "call_sites", "occurrences", "insertion_point", "uses"}


class RefactoringInstance(BaseModel):
    """One refactoring: its kind plus the parameter record the engine needs to perform it."""

    model_config = ConfigDict(frozen=True)

    kind: str
    params: dict[str, Any]

    @field_validator("params")
    @classmethod
    def _check_params(cls, value: dict[str, Any], info: ValidationInfo) -> dict[str, Any]:
        kind = info.data.get("kind")
        if kind not in PARAM_MODELS:
            return value
        return PARAM_MODELS[kind].model_validate(value).model_dump(mode="json")

    @classmethod
    def build(cls, kind: str, params: _Params) -> "RefactoringInstance":
        return cls(kind=kind, params=params.model_dump(mode="json"))

    @property
    def record(self) -> Any:
        """Typed view of ``params``; only defined for the supported kinds."""
        return PARAM_MODELS[self.kind].model_validate(self.params)

    def key(self) -> str:
        return json.dumps({"kind": self.kind, "params": self.params}, sort_keys=True)

    def position(self) -> int:
        spans = [v for k, v in self.params.items() if k in _SPAN_FIELDS and v]
        lines = []
        for value in spans:
            for span in value if isinstance(value, list) else [value]:
                lines.append(span["start_line"])
        return min(lines) if lines else 0

    def anchor(self) -> str:
        """Identity of the instance that survives the re-detection rounds of a mirror run."""
        p = self.params
        if self.kind not in PARAM_MODELS:
            return f"{self.kind}:{json.dumps(p, sort_keys=True)}"
        if self.kind == "rename_attribute":
            return f"{self.kind}:{p['entity']}.{p['new_name']}"
        if self.kind == "rename_method":
            return f"{self.kind}:{p['entity']}.{p['new_name']}({','.join(p['param_types'] or [])})"
        if self.kind in ("rename_parameter", "rename_variable"):
            owner = _strip_method_name(p["entity"])
            return f"{self.kind}:{owner}.{p['old_name']}#{p['ordinal']}->{p['new_name']}"
        if self.kind == "extract_variable":
            return f"{self.kind}:{_strip_method_name(p['method'])}.{p['new_name']}={p['expression']}"
        if self.kind == "inline_variable":
            return f"{self.kind}:{_strip_method_name(p['method'])}.{p['variable']}#{p['ordinal']}"
        if self.kind == "extract_method":
            owner = p["source_method"].rsplit("(", 1)[0].rsplit(".", 1)[0]
            return f"{self.kind}:{owner}.{p['new_name']}"
        if self.kind == "inline_method":
            return f"{self.kind}:{p['method']}"
        return f"{self.kind}:{p['new_class']}"

    def label(self) -> str:
        p = self.params
        if self.kind not in PARAM_MODELS:
            return self.kind
        if self.kind in RENAME_KINDS:
            return f"{self.kind} {p['entity']}: {p['old_name']}->{p['new_name']}"
        if self.kind == "extract_method":
            return f"extract_method {p['source_method']} -> {p['new_name']}"
        if self.kind == "inline_method":
            return f"inline_method {p['method']}"
        if self.kind == "extract_variable":
            return f"extract_variable {p['method']}: {p['new_name']} = {p['expression']}"
        if self.kind == "inline_variable":
            return f"inline_variable {p['method']}: {p['variable']}"
        return f"extract_class {p['source_class']} -> {p['new_class']}"


def _strip_method_name(method_path: str) -> str:
    """``A.m(int)`` -> ``A.*(int)``: renames of the enclosing method keep the anchor stable."""
    head, _, types = method_path.partition("(")
    owner = head.rsplit(".", 1)[0]
    return f"{owner}.*({types}"


class PreconditionViolation(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule_id: str
    message: str
    span: LineSpan


def sort_instances(instances: list[RefactoringInstance]) -> list[RefactoringInstance]:
    """Deterministic detector order: kind, then source position."""
    return sorted(instances, key=lambda r: (r.kind, r.position(), r.key()))
