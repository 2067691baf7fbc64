"""Refactoring subcategories (motives) and how far each one narrows the prompted code."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, TypeAdapter

from . import config
from .errors import UnknownSubcategory

SearchScope = Literal["document", "class", "method"]


class Subcategory(BaseModel):
    model_config = ConfigDict(frozen=True)

    description: str
    search_scope: SearchScope
    refactoring_types: list[str] = []
    user_defined: bool = False


BUILTIN: dict[str, Subcategory] = {
    "code_duplication": Subcategory(
        description="The same code snippet appears more than once; extract it so the copies share one definition.",
        search_scope="class",
        refactoring_types=["extract_method", "extract_variable"],
    ),
    "inconsistent_method_name": Subcategory(
        description="The method name does not describe what the method body does; rename it after its behavior.",
        search_scope="method",
        refactoring_types=["rename_method"],
    ),
    "naming_convention": Subcategory(
        description="An identifier breaks the naming style of the project (case, prefixes, abbreviations).",
        search_scope="class",
        refactoring_types=["rename_attribute", "rename_method", "rename_parameter", "rename_variable"],
    ),
    "ambiguous_semantics": Subcategory(
        description="An identifier is too vague to tell what it holds; give it a more descriptive name.",
        search_scope="class",
        refactoring_types=["rename_attribute", "rename_parameter", "rename_variable"],
    ),
    "use_as_reference": Subcategory(
        description="A local variable only forwards its initializer once; use the expression directly.",
        search_scope="method",
        refactoring_types=["inline_variable"],
    ),
    "proxy_method": Subcategory(
        description="A method only delegates to another call; inline it into its caller.",
        search_scope="class",
        refactoring_types=["inline_method"],
    ),
    "decomposing_large_class": Subcategory(
        description="A class carries a separate responsibility; move the related fields and methods into a new class.",
        search_scope="class",
        refactoring_types=["extract_class"],
    ),
    "decomposing_large_method": Subcategory(
        description="A method does several things; extract a cohesive block of statements into its own method.",
        search_scope="method",
        refactoring_types=["extract_method"],
    ),
    "extracting_complex_expressions": Subcategory(
        description="A long or repeated expression is hard to read; give it a name with a local variable.",
        search_scope="method",
        refactoring_types=["extract_variable"],
    ),
}

_ENTRIES = TypeAdapter(dict[str, Subcategory])


def load_extra(path: Path) -> dict[str, Subcategory]:
    """Read user-defined entries from a JSON object of ``key -> {description, search_scope, refactoring_types}``."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    entries = _ENTRIES.validate_python(raw)
    return {key: entry.model_copy(update={"user_defined": True}) for key, entry in entries.items()}


def subcategory_registry(extra: Optional[Path] = None) -> dict[str, Subcategory]:
    registry = dict(BUILTIN)
    path = extra or (Path(config.SUBCATEGORIES_FILE) if config.SUBCATEGORIES_FILE else None)
    if path is not None:
        registry.update(load_extra(path))
    return registry


def lookup(key: str, registry: Optional[dict[str, Subcategory]] = None) -> Subcategory:
    registry = registry if registry is not None else subcategory_registry()
    try:
        return registry[key]
    except KeyError:
        raise UnknownSubcategory(key) from None
