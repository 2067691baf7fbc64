"""Parsed documents: the ``SourceUnit`` value and the helpers built on it."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterator, Mapping, Optional

from .ast_nodes import (
    ClassDecl,
    FieldDecl,
    LocalVarDecl,
    MethodDecl,
    Node,
    ParamDecl,
    children,
    walk,
)
from .binder import EXTERNAL, REFERENCE_TYPES, BindingTarget, bind, iter_classes
from .errors import UnknownEntity, UnknownNode
from .parser import Parser
from .printer import print_document


@dataclass(frozen=True)
class SourceUnit:
    raw_text: str
    package_header: str
    imports: tuple[str, ...]
    types: tuple[ClassDecl, ...]
    binding_table: Mapping[int, BindingTarget] = field(compare=False, repr=False)
    loc: int = 0

    @cached_property
    def nodes(self) -> dict[int, Node]:
        index: dict[int, Node] = {}
        for cls in self.types:
            for node in walk(cls):
                index[node.id] = node
        return index

    @cached_property
    def parents(self) -> dict[int, Node]:
        index: dict[int, Node] = {}
        for cls in self.types:
            for node in walk(cls):
                for child in children(node):
                    index[child.id] = node
        return index

    @cached_property
    def references(self) -> dict[int, list[int]]:
        """Declaration id -> ids of the references bound to it, in source order."""
        index: dict[int, list[int]] = {}
        for ref_id in sorted(self.binding_table, key=lambda i: self.nodes[i].span.start_offset):
            target = self.binding_table[ref_id]
            if target != EXTERNAL:
                index.setdefault(target, []).append(ref_id)
        return index

    def node(self, node_id: int) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise UnknownNode(f"node {node_id} is not part of this unit") from None

    def parent(self, node: Node) -> Optional[Node]:
        return self.parents.get(node.id)

    def ancestors(self, node: Node) -> Iterator[Node]:
        current = self.parent(node)
        while current is not None:
            yield current
            current = self.parent(current)

    def enclosing(self, node: Node, kind: type) -> Optional[Node]:
        for ancestor in self.ancestors(node):
            if isinstance(ancestor, kind):
                return ancestor
        return None

    def slice(self, node: Node) -> str:
        """Source text of ``node`` as it appears in the parsed document."""
        return self.raw_text[node.span.start_offset:node.span.end_offset]

    def refs_to(self, decl: Node) -> list[Node]:
        return [self.nodes[i] for i in self.references.get(decl.id, [])]

    def target_of(self, ref: Node) -> Optional[Node]:
        target = self.binding_table.get(ref.id, EXTERNAL)
        return None if target == EXTERNAL else self.nodes.get(target)


def count_loc(source: str) -> int:
    return sum(1 for line in source.splitlines() if line.strip())


def parse(source: str) -> SourceUnit:
    parser = Parser(source)
    document = parser.parse_document()
    return SourceUnit(
        raw_text=source,
        package_header=document.package_header,
        imports=document.imports,
        types=document.types,
        binding_table=bind(document.types),
        loc=count_loc(source),
    )


def print_unit(unit: SourceUnit) -> str:
    return print_document(unit.package_header, unit.imports, unit.types)


def rebuild(unit: SourceUnit, types: tuple[ClassDecl, ...]) -> SourceUnit:
    """New unit holding ``types``, printed canonically and parsed again so spans, ids and bindings are fresh."""
    return parse(print_document(unit.package_header, unit.imports, types))


def resolve(unit: SourceUnit, ref: int) -> BindingTarget:
    node = unit.node(ref)
    if not isinstance(node, REFERENCE_TYPES):
        raise UnknownNode(f"node {ref} is a {node.kind}, not a name reference")
    return unit.binding_table.get(ref, EXTERNAL)


# ---- entity paths ----


def signature(method: MethodDecl) -> str:
    types = ",".join(t.replace(" ", "") for t in method.param_types)
    return f"{method.name}({types})"


def class_path(unit: SourceUnit, cls: ClassDecl) -> str:
    names = [cls.name]
    for ancestor in unit.ancestors(cls):
        if isinstance(ancestor, ClassDecl):
            names.append(ancestor.name)
    return ".".join(reversed(names))


def method_path(unit: SourceUnit, method: MethodDecl) -> str:
    return f"{class_path(unit, unit.enclosing(method, ClassDecl))}.{signature(method)}"


def entity_path(unit: SourceUnit, node: Node) -> str:
    """Dotted path of a declaration: ``Outer.Inner``, ``Outer.m(int,String)``, ``Outer.field``, ``Outer.m(int).x``."""
    if isinstance(node, ClassDecl):
        return class_path(unit, node)
    if isinstance(node, MethodDecl):
        return method_path(unit, node)
    if isinstance(node, FieldDecl):
        return f"{class_path(unit, unit.enclosing(node, ClassDecl))}.{node.name}"
    if isinstance(node, (ParamDecl, LocalVarDecl)):
        method = unit.enclosing(node, MethodDecl)
        if method is None:
            return f"{class_path(unit, unit.enclosing(node, ClassDecl))}.<init>.{node.name}"
        return f"{method_path(unit, method)}.{node.name}"
    raise UnknownEntity(f"{node.kind} has no entity path")


def iter_all_classes(unit: SourceUnit) -> Iterator[ClassDecl]:
    return iter(iter_classes(unit.types))


def iter_methods(unit: SourceUnit) -> Iterator[MethodDecl]:
    for cls in iter_all_classes(unit):
        for member in cls.members:
            if isinstance(member, MethodDecl):
                yield member


def find_class(unit: SourceUnit, path: str) -> ClassDecl:
    for cls in iter_all_classes(unit):
        if class_path(unit, cls) == path:
            return cls
    raise UnknownEntity(f"no class {path!r}")


def find_method(unit: SourceUnit, path: str) -> MethodDecl:
    for method in iter_methods(unit):
        if method_path(unit, method) == path:
            return method
    raise UnknownEntity(f"no method {path!r}")


def find_field(unit: SourceUnit, class_path_: str, name: str) -> FieldDecl:
    cls = find_class(unit, class_path_)
    for member in cls.members:
        if isinstance(member, FieldDecl) and member.name == name:
            return member
    raise UnknownEntity(f"no field {name!r} in {class_path_!r}")


def find_param(method: MethodDecl, name: str) -> ParamDecl:
    for param in method.params:
        if param.name == name:
            return param
    raise UnknownEntity(f"no parameter {name!r} in {method.name}")


def local_variables(method: MethodDecl) -> list[LocalVarDecl]:
    if method.body is None:
        return []
    return [n for n in walk(method.body) if isinstance(n, LocalVarDecl)]


def find_local(method: MethodDecl, name: str, ordinal: int = 0) -> LocalVarDecl:
    matches = [v for v in local_variables(method) if v.name == name]
    if ordinal >= len(matches):
        raise UnknownEntity(f"no local variable {name!r} #{ordinal} in {method.name}")
    return matches[ordinal]


def local_ordinal(method: MethodDecl, decl: LocalVarDecl) -> int:
    same = [v for v in local_variables(method) if v.name == decl.name]
    return next(k for k, v in enumerate(same) if v.id == decl.id)


# ---- JSON dump ----


def dump_node(node: Node) -> dict[str, Any]:
    entry: dict[str, Any] = {"kind": node.kind}
    name = getattr(node, "name", None)
    if isinstance(name, str):
        entry["name"] = name
    for attr in ("op", "text", "type_text", "return_type", "modifiers"):
        value = getattr(node, attr, None)
        if isinstance(value, str) and value:
            entry[attr] = value
    entry["span"] = node.span.lines()
    kids = [dump_node(child) for child in children(node)]
    if kids:
        entry["children"] = kids
    return entry


def dump_unit(unit: SourceUnit) -> dict[str, Any]:
    return {
        "package": unit.package_header,
        "imports": list(unit.imports),
        "loc": unit.loc,
        "types": [dump_node(cls) for cls in unit.types],
    }


def binding_paths(unit: SourceUnit) -> list[tuple[str, str, str]]:
    """Binding relation as (reference kind, reference name, declaration path) triples, in source order."""
    out = []
    for ref_id in sorted(unit.binding_table, key=lambda i: unit.nodes[i].span.start_offset):
        ref = unit.nodes[ref_id]
        target = unit.target_of(ref)
        if target is None:
            out.append((ref.kind, ref.name, EXTERNAL))
        else:
            out.append((ref.kind, ref.name, entity_path(unit, target)))
    return out
