"""Entity matching between two versions of a document.

Phase 1 pairs entities whose keys are identical (class path, method
signature, field name, parameter position and type, local name). Phase 2
pairs the leftovers greedily by token-level dice similarity of their
declarations and the statements that use them.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import replace
from typing import Iterable, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict

from .ast_nodes import Block, ClassDecl, FieldDecl, LocalVarDecl, MethodDecl, Node, ParamDecl, Stmt, map_nodes
from .config import DetectorConfig
from .errors import SourceSyntaxError
from .lexer import tokenize
from .printer import member_lines, print_param, stmt_lines
from .source_model import SourceUnit, class_path, iter_all_classes, local_variables, signature

EntityKind = Literal["class", "method", "field", "param", "local"]
Entity = Union[ClassDecl, MethodDecl, FieldDecl, ParamDecl, LocalVarDecl]
PLACEHOLDER = "$"


class EntityMatch(BaseModel):
    model_config = ConfigDict(frozen=True)

    before_id: int
    after_id: int
    kind: EntityKind
    similarity: float


def token_bag(text: str) -> Counter:
    try:
        return Counter(t.text for t in tokenize(text) if t.kind != "eof")
    except SourceSyntaxError:
        return Counter(text.split())


def dice(a: Counter, b: Counter) -> float:
    total = sum(a.values()) + sum(b.values())
    if total == 0:
        return 1.0
    return 2 * sum((a & b).values()) / total


def _usage_lines(unit: SourceUnit, decl: Node) -> list[str]:
    """First printed line of every statement that mentions ``decl``, with its name abstracted."""
    refs = unit.refs_to(decl)
    ids = {r.id for r in refs}
    lines = []
    for ref in refs:
        stmt = next((a for a in unit.ancestors(ref) if isinstance(a, Stmt) and not isinstance(a, Block)), None)
        if stmt is None:
            continue
        hidden = map_nodes(stmt, lambda n: replace(n, name=PLACEHOLDER) if n.id in ids else None)
        lines.append(stmt_lines(hidden)[0].strip())
    return lines


def entity_tokens(unit: SourceUnit, entity: Entity) -> Counter:
    """Token bag of an entity with its own name abstracted away."""
    if isinstance(entity, MethodDecl):
        text = "\n".join(member_lines(replace(entity, name=PLACEHOLDER)))
        return token_bag(text)
    if isinstance(entity, ClassDecl):
        return token_bag("\n".join(member_lines(replace(entity, name=PLACEHOLDER))))
    if isinstance(entity, FieldDecl):
        text = "\n".join(member_lines(replace(entity, name=PLACEHOLDER)))
    elif isinstance(entity, ParamDecl):
        text = print_param(replace(entity, name=PLACEHOLDER))
    else:
        text = stmt_lines(replace(entity, name=PLACEHOLDER))[0]
    return token_bag("\n".join([text, *_usage_lines(unit, entity)]))


class EntityMatcher:
    def __init__(self, before: SourceUnit, after: SourceUnit, config: Optional[DetectorConfig] = None):
        self.before = before
        self.after = after
        self.config = config or DetectorConfig()
        self.matches: list[EntityMatch] = []
        self._paired_before: set[int] = set()
        self._paired_after: set[int] = set()

    def match(self) -> list[EntityMatch]:
        before_classes = {class_path(self.before, c): c for c in iter_all_classes(self.before)}
        after_classes = {class_path(self.after, c): c for c in iter_all_classes(self.after)}
        for path, cls in before_classes.items():
            if path in after_classes:
                self._pair(cls, after_classes[path], "class", 1.0)
        self._greedy(
            [c for c in before_classes.values() if c.id not in self._paired_before],
            [c for c in after_classes.values() if c.id not in self._paired_after],
            "class",
        )
        for b_cls, a_cls in self.pairs_of("class"):
            self._match_members(b_cls, a_cls)
        for b_method, a_method in self.pairs_of("method"):
            self._match_params(b_method, a_method)
            self._match_locals(b_method, a_method)
        return list(self.matches)

    def pairs_of(self, kind: EntityKind) -> list[tuple[Node, Node]]:
        return [(self.before.nodes[m.before_id], self.after.nodes[m.after_id]) for m in self.matches if m.kind == kind]

    def _pair(self, b: Node, a: Node, kind: EntityKind, similarity: float) -> None:
        self.matches.append(EntityMatch(before_id=b.id, after_id=a.id, kind=kind, similarity=similarity))
        self._paired_before.add(b.id)
        self._paired_after.add(a.id)

    def _greedy(self, before: Iterable[Entity], after: Iterable[Entity], kind: EntityKind) -> None:
        before, after = list(before), list(after)
        if not before or not after:
            return
        before_bags = {b.id: entity_tokens(self.before, b) for b in before}
        after_bags = {a.id: entity_tokens(self.after, a) for a in after}
        scored = []
        for i, b in enumerate(before):
            for j, a in enumerate(after):
                similarity = dice(before_bags[b.id], after_bags[a.id])
                if similarity >= self.config.body_similarity:
                    scored.append((-similarity, i, j, b, a, similarity))
        for _, _, _, b, a, similarity in sorted(scored, key=lambda s: s[:3]):
            if b.id in self._paired_before or a.id in self._paired_after:
                continue
            self._pair(b, a, kind, similarity)

    def _match_members(self, b_cls: ClassDecl, a_cls: ClassDecl) -> None:
        b_methods = [m for m in b_cls.members if isinstance(m, MethodDecl)]
        a_methods = {signature(m): m for m in a_cls.members if isinstance(m, MethodDecl)}
        for method in b_methods:
            other = a_methods.get(signature(method))
            if other is not None and other.id not in self._paired_after:
                self._pair(method, other, "method", 1.0)
        self._greedy(
            [m for m in b_methods if m.id not in self._paired_before and not m.is_constructor],
            [m for m in a_methods.values() if m.id not in self._paired_after and not m.is_constructor],
            "method",
        )
        b_fields = [f for f in b_cls.members if isinstance(f, FieldDecl)]
        a_fields = {f.name: f for f in a_cls.members if isinstance(f, FieldDecl)}
        for fld in b_fields:
            if fld.name in a_fields:
                self._pair(fld, a_fields[fld.name], "field", 1.0)
        self._greedy(
            [f for f in b_fields if f.id not in self._paired_before],
            [f for f in a_fields.values() if f.id not in self._paired_after],
            "field",
        )

    def _match_params(self, b_method: MethodDecl, a_method: MethodDecl) -> None:
        a_by_name = {p.name: p for p in a_method.params}
        for param in b_method.params:
            other = a_by_name.get(param.name)
            if other is not None and other.type_text == param.type_text:
                self._pair(param, other, "param", 1.0)
        if len(b_method.params) == len(a_method.params):
            # same arity: a renamed parameter keeps its position and type
            for param, other in zip(b_method.params, a_method.params):
                if param.id in self._paired_before or other.id in self._paired_after:
                    continue
                if param.type_text == other.type_text:
                    similarity = dice(entity_tokens(self.before, param), entity_tokens(self.after, other))
                    self._pair(param, other, "param", similarity)
            return
        self._greedy(
            [p for p in b_method.params if p.id not in self._paired_before],
            [p for p in a_method.params if p.id not in self._paired_after],
            "param",
        )

    def _match_locals(self, b_method: MethodDecl, a_method: MethodDecl) -> None:
        b_locals = local_variables(b_method)
        a_locals = local_variables(a_method)
        b_groups: dict[str, list[LocalVarDecl]] = {}
        a_groups: dict[str, list[LocalVarDecl]] = {}
        for decl in b_locals:
            b_groups.setdefault(decl.name, []).append(decl)
        for decl in a_locals:
            a_groups.setdefault(decl.name, []).append(decl)
        for name, group in b_groups.items():
            others = a_groups.get(name, [])
            if len(others) == len(group):
                for decl, other in zip(group, others):
                    self._pair(decl, other, "local", 1.0)
        leftovers = [d for d in b_locals if d.id not in self._paired_before]
        candidates = [d for d in a_locals if d.id not in self._paired_after]
        for type_text in dict.fromkeys(d.type_text for d in leftovers):
            self._greedy(
                [d for d in leftovers if d.type_text == type_text],
                [d for d in candidates if d.type_text == type_text],
                "local",
            )


def match_entities(before: SourceUnit, after: SourceUnit, config: Optional[DetectorConfig] = None) -> list[EntityMatch]:
    return EntityMatcher(before, after, config).match()
