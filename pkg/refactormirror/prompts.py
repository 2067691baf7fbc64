"""Prompt rendering from the editable templates under ``templates/``."""
from __future__ import annotations

from functools import lru_cache
from typing import Optional

from pydantic import BaseModel, Field

from . import config
from .config import TemplateName
from .errors import MissingField, UnknownEntity
from .source_model import find_class, find_method, parse
from .subcategories import Subcategory, lookup

TYPE_NAMES = {
    "extract_class": "Extract Class",
    "extract_method": "Extract Method",
    "extract_variable": "Extract Variable",
    "inline_method": "Inline Method",
    "inline_variable": "Inline Variable",
    "rename_attribute": "Rename Attribute",
    "rename_method": "Rename Method",
    "rename_parameter": "Rename Parameter",
    "rename_variable": "Rename Variable",
}

TYPE_EXPLANATIONS = {
    "extract_class": "Move a group of related fields and methods into a new class and reach them through a field of that class.",
    "extract_method": "Move a fragment of statements into a new method and replace the fragment with a call to it.",
    "extract_variable": "Introduce a local variable that holds an expression and use the variable in place of the expression.",
    "inline_method": "Replace calls to a method with the method body and remove the method.",
    "inline_variable": "Replace the uses of a local variable with its initializer and remove the variable.",
    "rename_attribute": "Give a field a name that better describes what it holds.",
    "rename_method": "Give a method a name that better describes what it does.",
    "rename_parameter": "Give a method parameter a name that better describes what it holds.",
    "rename_variable": "Give a local variable a name that better describes what it holds.",
}


class PromptSpec(BaseModel):
    template: TemplateName
    refactoring_type: Optional[str] = None
    subcategory: Optional[str] = None
    target_entities: list[str] = Field(default_factory=list)
    code: str


class CodeSlice(BaseModel):
    """Lines ``start_line..end_line`` (1-based, inclusive) of the full document."""

    start_line: int
    end_line: int
    text: str


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    return (config.TEMPLATES_DIR / f"{name}.txt").read_text(encoding="utf-8")


def _class_of(path: str) -> str:
    head = path.split("(", 1)[0]
    return head.rsplit(".", 1)[0] if "(" in path else head


def scoped_slice(code: str, scope: str, target: str) -> CodeSlice:
    """The lines of the class or method ``target`` names, or the whole document for document scope."""
    lines = code.splitlines()
    if scope == "document":
        return CodeSlice(start_line=1, end_line=len(lines), text=code)
    unit = parse(code)
    if scope == "method":
        if "(" not in target:
            raise MissingField(f"method scope needs a method path, got {target!r}")
        node = find_method(unit, target)
    else:
        node = find_class(unit, _class_of(target))
    start, end = node.span.start_line, node.span.end_line
    return CodeSlice(start_line=start, end_line=end, text="\n".join(lines[start - 1:end]))


def splice(code: str, piece: CodeSlice, replacement: str) -> str:
    """Put ``replacement`` where ``piece`` was taken from."""
    lines = code.splitlines()
    out = [*lines[:piece.start_line - 1], *replacement.splitlines(), *lines[piece.end_line:]]
    trailing = "\n" if code.endswith("\n") else ""
    return "\n".join(out) + trailing


def _require(spec: PromptSpec, *names: str) -> None:
    for name in names:
        if not getattr(spec, name):
            raise MissingField(f"template {spec.template} needs {name}")


def narrowed(spec: PromptSpec, subcategory: Subcategory) -> CodeSlice:
    _require(spec, "target_entities")
    try:
        return scoped_slice(spec.code, subcategory.search_scope, spec.target_entities[0])
    except UnknownEntity as err:
        raise MissingField(f"target entity not in code: {err}") from err


def render(spec: PromptSpec, registry: Optional[dict[str, Subcategory]] = None) -> str:
    """Fill the template named by ``spec``. Identical specs give byte-identical prompts."""
    values = {"code": spec.code.rstrip("\n")}
    if spec.template != "P1":
        _require(spec, "refactoring_type")
        if spec.refactoring_type not in TYPE_NAMES:
            raise MissingField(f"unknown refactoring type {spec.refactoring_type!r}")
        values["refactoring_name"] = TYPE_NAMES[spec.refactoring_type]
        values["type_explanation"] = TYPE_EXPLANATIONS[spec.refactoring_type]
    if spec.template in ("P2_SUB", "P2_SUB_NARROW"):
        _require(spec, "subcategory")
        subcategory = lookup(spec.subcategory, registry)
        values["subcategory_name"] = spec.subcategory.replace("_", " ")
        values["subcategory_description"] = subcategory.description
        if spec.template == "P2_SUB_NARROW":
            values["code"] = narrowed(spec, subcategory).text.rstrip("\n")
            values["scope"] = subcategory.search_scope
    if spec.template == "P3":
        _require(spec, "target_entities")
        values["entities"] = ", ".join(spec.target_entities)
    return load_template(spec.template).format(**values)
