"""Name binding for parsed documents.

Reference nodes are ``Name``, ``MethodCall`` and ``FieldAccess``. Each one maps
to the id of its in-unit declaration or to ``EXTERNAL``. Locals and
parameters shadow fields; fields are visible throughout their class and its
nested classes; methods resolve by name and arity.
"""
from __future__ import annotations

from typing import Iterable, Optional, Union

from .ast_nodes import (
    Block,
    Catch,
    ClassDecl,
    Expr,
    ExprStmt,
    FieldAccess,
    FieldDecl,
    For,
    ForEach,
    If,
    Initializer,
    Literal,
    LocalVarDecl,
    MethodCall,
    MethodDecl,
    Name,
    Node,
    ParamDecl,
    Return,
    Stmt,
    Throw,
    Try,
    While,
    children,
)


EXTERNAL = "external"

BindingTarget = Union[int, str]
REFERENCE_TYPES = (Name, MethodCall, FieldAccess)


class Scope:
    def __init__(self, parent: Optional["Scope"] = None):
        self.parent = parent
        self.names: dict[str, Union[LocalVarDecl, ParamDecl]] = {}

    def declare(self, decl: Union[LocalVarDecl, ParamDecl]) -> None:
        self.names[decl.name] = decl

    def lookup(self, name: str) -> Optional[Union[LocalVarDecl, ParamDecl]]:
        scope: Optional[Scope] = self
        while scope is not None:
            if name in scope.names:
                return scope.names[name]
            scope = scope.parent
        return None


def iter_classes(types: Iterable[ClassDecl]) -> Iterable[ClassDecl]:
    for cls in types:
        yield cls
        yield from iter_classes(m for m in cls.members if isinstance(m, ClassDecl))


def find_field(cls: ClassDecl, name: str) -> Optional[FieldDecl]:
    for member in cls.members:
        if isinstance(member, FieldDecl) and member.name == name:
            return member
    return None


def find_method(cls: ClassDecl, name: str, arity: int) -> Optional[MethodDecl]:
    for member in cls.members:
        if isinstance(member, MethodDecl) and not member.is_constructor:
            if member.name == name and len(member.params) == arity:
                return member
    return None


def find_constructor(cls: ClassDecl, arity: int) -> Optional[MethodDecl]:
    for member in cls.members:
        if isinstance(member, MethodDecl) and member.is_constructor and len(member.params) == arity:
            return member
    return None


class Binder:
    def __init__(self, types: tuple[ClassDecl, ...]):
        self.types = types
        self.table: dict[int, BindingTarget] = {}
        self.classes: dict[str, ClassDecl] = {}
        for cls in iter_classes(types):
            self.classes.setdefault(cls.name, cls)
        # declarations by id, to follow typed receivers like ``other.field``
        self.declarations: dict[int, Node] = {}

    def bind(self) -> dict[int, BindingTarget]:
        for cls in self.types:
            self._class(cls, ())
        return self.table

    def _class(self, cls: ClassDecl, enclosing: tuple[ClassDecl, ...]) -> None:
        chain = enclosing + (cls,)
        for member in cls.members:
            if isinstance(member, FieldDecl):
                self.declarations[member.id] = member
        for member in cls.members:
            if isinstance(member, FieldDecl) and member.init is not None:
                self._expr(member.init, Scope(), chain)
            elif isinstance(member, MethodDecl):
                scope = Scope()
                for param in member.params:
                    self._declare(scope, param)
                if member.body is not None:
                    self._stmt(member.body, scope, chain)
            elif isinstance(member, Initializer):
                self._stmt(member.body, Scope(), chain)
            elif isinstance(member, ClassDecl):
                self._class(member, chain)

    def _declare(self, scope: Scope, decl: Union[LocalVarDecl, ParamDecl]) -> None:
        scope.declare(decl)
        self.declarations[decl.id] = decl

    def _stmt(self, stmt: Stmt, scope: Scope, chain: tuple[ClassDecl, ...]) -> None:
        if isinstance(stmt, Block):
            inner = Scope(scope)
            for child in stmt.stmts:
                self._stmt(child, inner, chain)
        elif isinstance(stmt, LocalVarDecl):
            if stmt.init is not None:
                self._expr(stmt.init, scope, chain)
            self._declare(scope, stmt)
        elif isinstance(stmt, ExprStmt):
            self._expr(stmt.expr, scope, chain)
        elif isinstance(stmt, If):
            self._expr(stmt.cond, scope, chain)
            self._stmt(stmt.then, Scope(scope), chain)
            if stmt.otherwise is not None:
                self._stmt(stmt.otherwise, Scope(scope), chain)
        elif isinstance(stmt, While):
            self._expr(stmt.cond, scope, chain)
            self._stmt(stmt.body, Scope(scope), chain)
        elif isinstance(stmt, For):
            inner = Scope(scope)
            for init in stmt.init:
                self._stmt(init, inner, chain)
            if stmt.cond is not None:
                self._expr(stmt.cond, inner, chain)
            for update in stmt.update:
                self._expr(update, inner, chain)
            self._stmt(stmt.body, Scope(inner), chain)
        elif isinstance(stmt, ForEach):
            self._expr(stmt.iterable, scope, chain)
            inner = Scope(scope)
            self._declare(inner, stmt.var)
            self._stmt(stmt.body, inner, chain)
        elif isinstance(stmt, (Return, Throw)):
            if stmt.value is not None:
                self._expr(stmt.value, scope, chain)
        elif isinstance(stmt, Try):
            inner = Scope(scope)
            for resource in stmt.resources:
                if isinstance(resource, LocalVarDecl):
                    self._stmt(resource, inner, chain)
                else:
                    self._expr(resource, inner, chain)
            self._stmt(stmt.body, inner, chain)
            for catch in stmt.catches:
                self._catch(catch, scope, chain)
            if stmt.finally_ is not None:
                self._stmt(stmt.finally_, scope, chain)

    def _catch(self, catch: Catch, scope: Scope, chain: tuple[ClassDecl, ...]) -> None:
        inner = Scope(scope)
        self._declare(inner, catch.param)
        self._stmt(catch.body, inner, chain)

    def _lookup_name(self, name: str, scope: Scope, chain: tuple[ClassDecl, ...]) -> BindingTarget:
        decl = scope.lookup(name)
        if decl is not None:
            return decl.id
        for cls in reversed(chain):
            field = find_field(cls, name)
            if field is not None:
                return field.id
        cls = self.classes.get(name)
        if cls is not None:
            return cls.id
        return EXTERNAL

    def _receiver_class(self, target: Expr, scope: Scope, chain: tuple[ClassDecl, ...]) -> Optional[ClassDecl]:
        """In-unit class a qualified access goes through, if it can be named without type inference."""
        if isinstance(target, Literal) and target.text == "this":
            return chain[-1]
        if not isinstance(target, Name):
            return None
        bound = self.table.get(target.id)
        if bound is None or bound == EXTERNAL:
            return None
        for cls in iter_classes(self.types):
            if cls.id == bound:
                return cls
        decl = self.declarations.get(bound)
        if decl is None:
            return None
        return self.classes.get(decl.type_text)

    def _expr(self, expr: Expr, scope: Scope, chain: tuple[ClassDecl, ...]) -> None:
        if isinstance(expr, Name):
            self.table[expr.id] = self._lookup_name(expr.name, scope, chain)
            return
        if isinstance(expr, MethodCall):
            if expr.target is None:
                self.table[expr.id] = self._resolve_call(expr, chain)
            else:
                self._expr(expr.target, scope, chain)
                receiver = self._receiver_class(expr.target, scope, chain)
                method = find_method(receiver, expr.name, len(expr.args)) if receiver is not None else None
                self.table[expr.id] = method.id if method is not None else EXTERNAL
            for arg in expr.args:
                self._expr(arg, scope, chain)
            return
        if isinstance(expr, FieldAccess):
            self._expr(expr.target, scope, chain)
            receiver = self._receiver_class(expr.target, scope, chain)
            field = find_field(receiver, expr.name) if receiver is not None else None
            self.table[expr.id] = field.id if field is not None else EXTERNAL
            return
        for child in children(expr):
            if isinstance(child, Expr):
                self._expr(child, scope, chain)

    def _resolve_call(self, call: MethodCall, chain: tuple[ClassDecl, ...]) -> BindingTarget:
        arity = len(call.args)
        if call.name == "this":
            ctor = find_constructor(chain[-1], arity)
            return ctor.id if ctor is not None else EXTERNAL
        if call.name == "super":
            return EXTERNAL
        for cls in reversed(chain):
            method = find_method(cls, call.name, arity)
            if method is not None:
                return method.id
        return EXTERNAL


def bind(types: tuple[ClassDecl, ...]) -> dict[int, BindingTarget]:
    return Binder(types).bind()
