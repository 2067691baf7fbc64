"""AST node types for the Java-subset dialect.

Nodes are frozen dataclasses. ``span`` and ``id`` are excluded from equality,
so ``==`` between two nodes is structural equality (kinds, names, nesting).
Nodes built by the engine carry ``id=-1`` until the unit is reprinted and
reparsed.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from typing import Callable, Iterator, Optional, Union


@dataclass(frozen=True)
class Span:
    start_offset: int
    end_offset: int
    start_line: int
    end_line: int

    def contains(self, other: "Span") -> bool:
        return self.start_offset <= other.start_offset and other.end_offset <= self.end_offset

    def lines(self) -> dict:
        return {"start_line": self.start_line, "end_line": self.end_line}


NO_SPAN = Span(0, 0, 0, 0)


@dataclass(frozen=True, kw_only=True)
class Node:
    span: Span = field(default=NO_SPAN, compare=False, repr=False)
    id: int = field(default=-1, compare=False, repr=False)

    @property
    def kind(self) -> str:
        return type(self).__name__


# Expressions


class Expr(Node):
    pass


@dataclass(frozen=True)
class Literal(Expr):
    text: str


@dataclass(frozen=True)
class Name(Expr):
    name: str


@dataclass(frozen=True)
class FieldAccess(Expr):
    target: Expr
    name: str


@dataclass(frozen=True)
class MethodCall(Expr):
    target: Optional[Expr]
    name: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Unary(Expr):
    op: str
    operand: Expr
    postfix: bool = False


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True)
class InstanceOf(Expr):
    expr: Expr
    type_text: str


@dataclass(frozen=True)
class Assign(Expr):
    op: str
    target: Expr
    value: Expr


@dataclass(frozen=True)
class Ternary(Expr):
    cond: Expr
    then: Expr
    otherwise: Expr


@dataclass(frozen=True)
class New(Expr):
    type_text: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class Cast(Expr):
    type_text: str
    expr: Expr


@dataclass(frozen=True)
class ArrayAccess(Expr):
    target: Expr
    index: Expr


@dataclass(frozen=True)
class OpaqueExpr(Expr):
    """Unsupported expression (lambda, method reference, array creation...), kept verbatim."""

    text: str


# Statements


class Stmt(Node):
    pass


@dataclass(frozen=True)
class Block(Stmt):
    stmts: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class LocalVarDecl(Stmt):
    modifiers: str
    type_text: str
    name: str
    init: Optional[Expr] = None


@dataclass(frozen=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: Stmt
    otherwise: Optional[Stmt] = None


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass(frozen=True)
class For(Stmt):
    init: tuple[Stmt, ...]
    cond: Optional[Expr]
    update: tuple[Expr, ...]
    body: Stmt


@dataclass(frozen=True)
class ForEach(Stmt):
    var: LocalVarDecl
    iterable: Expr
    body: Stmt


@dataclass(frozen=True)
class Return(Stmt):
    value: Optional[Expr] = None


@dataclass(frozen=True)
class Throw(Stmt):
    value: Expr


@dataclass(frozen=True)
class Break(Stmt):
    label: str = ""


@dataclass(frozen=True)
class Continue(Stmt):
    label: str = ""


@dataclass(frozen=True)
class ParamDecl(Node):
    modifiers: str
    type_text: str
    name: str


@dataclass(frozen=True)
class Catch(Node):
    param: ParamDecl
    body: Block


@dataclass(frozen=True)
class Try(Stmt):
    resources: tuple[Union[LocalVarDecl, Expr], ...]
    body: Block
    catches: tuple[Catch, ...] = ()
    finally_: Optional[Block] = None


@dataclass(frozen=True)
class OpaqueStmt(Stmt):
    """Unsupported statement (switch, do-while, labeled, local class...), kept verbatim."""

    text: str


# Declarations


class Member(Node):
    pass


@dataclass(frozen=True)
class FieldDecl(Member):
    modifiers: str
    type_text: str
    name: str
    init: Optional[Expr] = None


@dataclass(frozen=True)
class MethodDecl(Member):
    modifiers: str
    type_params: str
    return_type: Optional[str]  # None for constructors
    name: str
    params: tuple[ParamDecl, ...]
    throws: str
    body: Optional[Block]

    @property
    def is_constructor(self) -> bool:
        return self.return_type is None

    @property
    def param_types(self) -> tuple[str, ...]:
        return tuple(p.type_text for p in self.params)


@dataclass(frozen=True)
class Initializer(Member):
    modifiers: str
    body: Block


@dataclass(frozen=True)
class ClassDecl(Member):
    modifiers: str
    keyword: str  # class | interface | enum
    name: str
    header: str
    members: tuple[Member, ...] = ()


@dataclass(frozen=True)
class OpaqueMember(Member):
    text: str


DECLARATION_TYPES = (ClassDecl, FieldDecl, MethodDecl, ParamDecl, LocalVarDecl)


# Traversal


def children(node: Node) -> Iterator[Node]:
    for f in fields(node):
        if f.name in ("span", "id"):
            continue
        value = getattr(node, f.name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [node]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(children(current))))


def _map_value(value, fn):
    if isinstance(value, Node):
        return fn(value)
    if isinstance(value, tuple):
        mapped = tuple(_map_value(v, fn) for v in value)
        if all(a is b for a, b in zip(mapped, value)):
            return value
        return mapped
    return value


def map_nodes(node: Node, fn: Callable[[Node], Optional[Node]]) -> Node:
    """Bottom-up rewrite: children are rebuilt first, then ``fn`` may replace the rebuilt node."""
    changes = {}
    for f in fields(node):
        if f.name in ("span", "id"):
            continue
        value = getattr(node, f.name)
        new_value = _map_value(value, lambda n: map_nodes(n, fn))
        if new_value is not value:
            changes[f.name] = new_value
    rebuilt = replace(node, **changes) if changes else node
    replacement = fn(rebuilt)
    return rebuilt if replacement is None else replacement


def renumber(node: Node, next_id: Callable[[], int], mapping: dict[int, int]) -> Node:
    """Copy of ``node`` where every node gets a fresh id; ``mapping`` records old id -> new id."""

    def fresh(n: Node) -> Node:
        new_id = next_id()
        if n.id >= 0:
            mapping[n.id] = new_id
        return replace(n, id=new_id)

    return map_nodes(node, fresh)


def child_index_path(root: Node, target_id: int) -> Optional[tuple[int, ...]]:
    """Positions of the children leading from ``root`` to the node with ``target_id``."""
    if root.id == target_id:
        return ()
    for k, child in enumerate(children(root)):
        sub = child_index_path(child, target_id)
        if sub is not None:
            return (k, *sub)
    return None


def node_at(root: Node, path: tuple[int, ...]) -> Node:
    node = root
    for k in path:
        node = list(children(node))[k]
    return node
