"""Refactoring detection between two versions of a document.

Renames come straight from entity matches whose names differ. The before
version is then normalized by those renames, keeping node ids and spans, so
the extract and inline heuristics compare like with like.
"""
from __future__ import annotations

from dataclasses import replace
from typing import Optional

import logfire

from .ast_nodes import (
    Assign,
    Block,
    ClassDecl,
    Expr,
    ExprStmt,
    FieldAccess,
    FieldDecl,
    Literal,
    LocalVarDecl,
    MethodCall,
    MethodDecl,
    Name,
    Node,
    ParamDecl,
    Return,
    Stmt,
    map_nodes,
    walk,
)
from .binder import EXTERNAL
from .config import DetectorConfig
from .engine import (
    expression_occurrences,
    extract_variable_instance,
    inline_layout,
    inline_method_instance,
    inline_variable_instance,
    insertion_candidates,
    rename_instance,
    rename_target,
)
from .errors import PreconditionFailed
from .matching import EntityMatcher, EntityMatch
from .printer import print_expr, print_stmt, stmt_lines
from .refactorings import (
    ExtractClassParams,
    ExtractMethodParams,
    LineSpan,
    RefactoringInstance,
    sort_instances,
)
from .source_model import SourceUnit, class_path, local_variables, method_path, signature


def _statements(method: MethodDecl) -> list[Stmt]:
    if method.body is None:
        return []
    return [n for n in walk(method.body) if isinstance(n, Stmt) and not isinstance(n, Block)]


def _first_lines(method: MethodDecl) -> set[str]:
    return {stmt_lines(s)[0].strip() for s in _statements(method)}


def _innermost_statement(unit: SourceUnit, node: Node) -> Optional[Stmt]:
    for ancestor in unit.ancestors(node):
        if isinstance(ancestor, Stmt) and not isinstance(ancestor, Block):
            return ancestor
    return None


def _find(root: Node, node_id: int) -> Optional[Node]:
    return next((n for n in walk(root) if n.id == node_id), None)


def _inline_simulation(method: MethodDecl, decl: LocalVarDecl, uses: list[Node]) -> tuple[MethodDecl, Optional[Stmt]]:
    """``method`` with ``decl`` inlined at ``uses`` and removed, plus the statement that followed it."""
    use_ids = {u.id for u in uses}
    following: list[Stmt] = []

    def fn(n: Node) -> Optional[Node]:
        if n.id in use_ids:
            return decl.init
        if isinstance(n, Block) and any(s.id == decl.id for s in n.stmts):
            k = next(i for i, s in enumerate(n.stmts) if s.id == decl.id)
            stmts = n.stmts[:k] + n.stmts[k + 1:]
            if k < len(stmts):
                following.append(stmts[k])
            return replace(n, stmts=stmts)
        return None

    return map_nodes(method, fn), (following[0] if following else None)


def _contains_run(method: MethodDecl, printed: list[str]) -> Optional[tuple[Block, int]]:
    """First block whose consecutive statements print exactly as ``printed``."""
    if method.body is None or not printed:
        return None
    for block in walk(method.body):
        if not isinstance(block, Block):
            continue
        texts = [print_stmt(s) for s in block.stmts]
        for start in range(len(texts) - len(printed) + 1):
            if texts[start:start + len(printed)] == printed:
                return block, start
    return None


class Detector:
    def __init__(self, before: SourceUnit, after: SourceUnit, config: Optional[DetectorConfig] = None):
        self.before = before
        self.after = after
        self.config = config or DetectorConfig()
        self.matches: list[EntityMatch] = []
        self.before_to_after: dict[int, int] = {}
        self.after_to_before: dict[int, int] = {}
        self.normal = before

    def detect(self) -> list[RefactoringInstance]:
        with logfire.span("detect refactorings"):
            matcher = EntityMatcher(self.before, self.after, self.config)
            self.matches = matcher.match()
            self.before_to_after = {m.before_id: m.after_id for m in self.matches}
            self.after_to_before = {m.after_id: m.before_id for m in self.matches}
            renames = self.detect_renames()
            self.normal = self._normalized(renames)
            found = [
                *renames,
                *self.detect_extract_variable(),
                *self.detect_inline_variable(),
                *self.detect_extract_method(),
                *self.detect_inline_method(),
                *self.detect_extract_class(),
            ]
            if self.config.subsume_renames:
                found = self._subsume(found)
            unique = list({r.key(): r for r in found}.values())
            logfire.info("detected {count} refactorings", count=len(unique), kinds=sorted({r.kind for r in unique}))
            return sort_instances(unique)

    def _method_pairs(self) -> list[tuple[MethodDecl, MethodDecl]]:
        """(normalized before method, after method) for every matched method."""
        return [
            (self.normal.nodes[m.before_id], self.after.nodes[m.after_id])
            for m in self.matches if m.kind == "method"
        ]

    def _class_pairs(self) -> list[tuple[ClassDecl, ClassDecl]]:
        return [
            (self.normal.nodes[m.before_id], self.after.nodes[m.after_id])
            for m in self.matches if m.kind == "class"
        ]

    # ---- renames ----

    def detect_renames(self) -> list[RefactoringInstance]:
        out = []
        for m in self.matches:
            if m.kind not in ("field", "method", "param", "local"):
                continue
            b = self.before.nodes[m.before_id]
            a = self.after.nodes[m.after_id]
            if b.name == a.name:
                continue
            if isinstance(b, MethodDecl) and (b.is_constructor or signature(replace(b, name=a.name)) != signature(a)):
                continue
            if not self._consistently_renamed(b, a):
                logfire.info("partial rename of {name} ignored", name=b.name)
                continue
            out.append(rename_instance(self.before, b, a.name))
        return out

    def _consistently_renamed(self, b: Node, a: Node) -> bool:
        """No reference to the old name is left dangling in the scope of the renamed declaration."""
        if isinstance(a, (FieldDecl, MethodDecl)):
            scope: Optional[Node] = a
            for ancestor in self.after.ancestors(a):
                if isinstance(ancestor, ClassDecl):
                    scope = ancestor
        else:
            scope = self.after.enclosing(a, MethodDecl)
        if scope is None:
            return True
        for node in walk(scope):
            if getattr(node, "name", None) != b.name or self.after.binding_table.get(node.id) != EXTERNAL:
                continue
            if isinstance(node, Name):
                return False
            if isinstance(node, (MethodCall, FieldAccess)) and (
                node.target is None or (isinstance(node.target, Literal) and node.target.text == "this")
            ):
                return False
        return True

    def _normalized(self, renames: list[RefactoringInstance]) -> SourceUnit:
        new_names: dict[int, str] = {}
        for r in renames:
            decl = rename_target(self.before, r.kind, r.record)
            for node in [decl, *self.before.refs_to(decl)]:
                new_names[node.id] = r.params["new_name"]
        if not new_names:
            return self.before
        types = tuple(
            map_nodes(cls, lambda n: replace(n, name=new_names[n.id]) if n.id in new_names else None)
            for cls in self.before.types
        )
        return replace(self.before, types=types)

    # ---- variables ----

    def detect_extract_variable(self) -> list[RefactoringInstance]:
        out = []
        matched_after = set(self.after_to_before)
        for mb, ma in self._method_pairs():
            for decl in local_variables(ma):
                if decl.id in matched_after or decl.init is None or not isinstance(self.after.parent(decl), Block):
                    continue
                instance = self._extract_variable(mb, ma, decl)
                if instance is not None:
                    out.append(instance)
        return out

    def _extract_variable(self, mb: MethodDecl, ma: MethodDecl, decl: LocalVarDecl) -> Optional[RefactoringInstance]:
        # uses left unresolved by a misplaced declaration still count
        uses = self.after.refs_to(decl) + [
            n for n in walk(ma) if isinstance(n, Name) and n.name == decl.name
            and self.after.binding_table.get(n.id) == EXTERNAL
        ]
        if not uses:
            return None
        simulated, following = _inline_simulation(ma, decl, uses)
        expression = print_expr(decl.init)
        after_found = [n for n in walk(simulated.body) if isinstance(n, Expr) and print_expr(n) == expression]
        before_found = expression_occurrences(mb, expression)
        indices = [k for k, n in enumerate(after_found) if n.id == decl.init.id]
        if not indices or len(after_found) != len(before_found):
            return None
        before_lines = _first_lines(mb)
        for use in uses:
            stmt = _innermost_statement(self.after, use)
            rebuilt = _find(simulated, stmt.id) if stmt is not None else None
            if rebuilt is None or stmt_lines(rebuilt)[0].strip() not in before_lines:
                return None
        occurrences = [before_found[k] for k in indices]
        candidates = insertion_candidates(self.normal, occurrences)
        if not candidates:
            return None
        chosen = candidates[0]
        if following is not None:
            text = print_stmt(following)
            chosen = next((c for c in candidates if print_stmt(c.stmt) == text), chosen)
        original = self.before.nodes[mb.id]
        return extract_variable_instance(
            self.before, original, [self.before.nodes[o.id] for o in occurrences], decl.name,
            type_text=decl.type_text, modifiers=decl.modifiers, insertion=self.before.nodes[chosen.stmt.id],
        )

    def detect_inline_variable(self) -> list[RefactoringInstance]:
        out = []
        matched_before = set(self.before_to_after)
        for mb, ma in self._method_pairs():
            after_lines = _first_lines(ma)
            for decl in local_variables(mb):
                if decl.id in matched_before or decl.init is None or not isinstance(self.normal.parent(decl), Block):
                    continue
                uses = self.normal.refs_to(decl)
                if not uses:
                    continue
                simulated, _ = _inline_simulation(mb, decl, uses)
                consistent = True
                for use in uses:
                    stmt = _innermost_statement(self.normal, use)
                    rebuilt = _find(simulated, stmt.id) if stmt is not None else None
                    if rebuilt is None or stmt_lines(rebuilt)[0].strip() not in after_lines:
                        consistent = False
                        break
                if consistent:
                    out.append(inline_variable_instance(self.before, self.before.nodes[decl.id]))
        return out

    # ---- methods ----

    def detect_extract_method(self) -> list[RefactoringInstance]:
        out = []
        for _, a_cls in self._class_pairs():
            for new in a_cls.members:
                if (isinstance(new, MethodDecl) and new.id not in self.after_to_before
                        and not new.is_constructor and new.body is not None):
                    instance = self._extract_method(a_cls, new)
                    if instance is not None:
                        out.append(instance)
        return out

    def _extract_method(self, a_cls: ClassDecl, new: MethodDecl) -> Optional[RefactoringInstance]:
        calls = self.after.refs_to(new)
        if len(calls) != 1 or not all(isinstance(arg, Name) for arg in calls[0].args):
            return None
        call = calls[0]
        caller = self.after.enclosing(call, MethodDecl)
        if caller is None or caller.id not in self.after_to_before:
            return None
        source = self.normal.nodes[self.after_to_before[caller.id]]
        stmt = _innermost_statement(self.after, call)
        body = list(new.body.stmts)
        last = body[-1] if body else None
        return_variable = None
        if isinstance(stmt, ExprStmt) and stmt.expr.id == call.id:
            if new.return_type != "void":
                return None
            region = body
        elif isinstance(stmt, LocalVarDecl) and stmt.init is not None and stmt.init.id == call.id:
            if not isinstance(last, Return) or last.value is None:
                return None
            return_variable = stmt.name
            bound = self.after.target_of(last.value) if isinstance(last.value, Name) else None
            if isinstance(bound, LocalVarDecl) and bound.name == stmt.name:
                region = body[:-1]
            else:
                region = body[:-1] + [LocalVarDecl(stmt.modifiers, stmt.type_text, stmt.name, last.value, id=stmt.id)]
        elif (isinstance(stmt, ExprStmt) and isinstance(stmt.expr, Assign) and stmt.expr.op == "="
              and stmt.expr.value.id == call.id and isinstance(stmt.expr.target, Name)):
            if not isinstance(last, Return) or not isinstance(last.value, Name):
                return None
            bound = self.after.target_of(last.value)
            params = list(new.params)
            if not isinstance(bound, ParamDecl) or bound.id not in {p.id for p in params}:
                return None
            index = next(k for k, p in enumerate(params) if p.id == bound.id)
            if call.args[index].name != stmt.expr.target.name:
                return None
            return_variable = stmt.expr.target.name
            region = body[:-1]
        else:
            return None
        arg_of = {p.id: arg.name for p, arg in zip(new.params, call.args)}

        def to_argument(n: Node) -> Optional[Node]:
            if isinstance(n, Name) and self.after.binding_table.get(n.id) in arg_of:
                return replace(n, name=arg_of[self.after.binding_table[n.id]])
            return None

        printed = [print_stmt(map_nodes(s, to_argument)) for s in region]
        found = _contains_run(source, printed)
        if found is None:
            return None
        block, start = found
        statements = block.stmts[start:start + len(printed)]
        members = list(a_cls.members)
        index = next(k for k, m in enumerate(members) if m.id == new.id)
        caller_index = next(k for k, m in enumerate(members) if m.id == caller.id)
        params = ExtractMethodParams(
            source_method=method_path(self.before, self.before.nodes[source.id]),
            statements=[LineSpan.of(s.span) for s in statements],
            new_name=new.name,
            parameters=[p.name for p in new.params],
            arguments=[arg.name for arg in call.args],
            return_variable=return_variable,
            call_site=LineSpan.of(statements[0].span),
            modifiers=new.modifiers,
            throws=new.throws,
            position=None if index == caller_index + 1 else index,
        )
        return RefactoringInstance.build("extract_method", params)

    def detect_inline_method(self) -> list[RefactoringInstance]:
        out = []
        for b_cls, _ in self._class_pairs():
            for old in b_cls.members:
                if (isinstance(old, MethodDecl) and old.id not in self.before_to_after
                        and not old.is_constructor and old.body is not None):
                    if self._inlined(old):
                        out.append(inline_method_instance(self.before, self.before.nodes[old.id]))
        return out

    def _inlined(self, old: MethodDecl) -> bool:
        calls = self.normal.refs_to(old)
        if not calls:
            return False
        for call in calls:
            caller = self.normal.enclosing(call, MethodDecl)
            if caller is None or caller.id not in self.before_to_after:
                return False
        try:
            types, layout = inline_layout(self.normal, inline_method_instance(self.normal, old))
        except PreconditionFailed:
            return False
        if len(layout) != len(calls):
            return False
        for block_id, start, count in layout:
            block = next((n for cls in types for n in walk(cls) if n.id == block_id), None)
            caller = self.normal.enclosing(self.normal.nodes[block_id], MethodDecl)
            target = self.after.nodes[self.before_to_after[caller.id]]
            printed = [print_stmt(s) for s in block.stmts[start:start + count]]
            if printed and _contains_run(target, printed) is None:
                return False
        return True

    # ---- classes ----

    def detect_extract_class(self) -> list[RefactoringInstance]:
        out = []
        pairs = self._class_pairs()
        matched_after = set(self.after_to_before)
        for new in (n for cls in self.after.types for n in walk(cls)):
            if not isinstance(new, ClassDecl) or new.id in matched_after:
                continue
            owner = self.after.enclosing(new, ClassDecl)
            fields = [m for m in new.members if isinstance(m, FieldDecl)]
            methods = [m for m in new.members if isinstance(m, MethodDecl) and not m.is_constructor]
            if not fields and not methods:
                continue
            for b_cls, a_cls in pairs:
                if owner is not None and owner.id != a_cls.id:
                    continue
                instance = self._extract_class(b_cls, a_cls, new, fields, methods, nested=owner is not None)
                if instance is not None:
                    out.append(instance)
                    break
        return out

    def _extract_class(self, b_cls: ClassDecl, a_cls: ClassDecl, new: ClassDecl, fields: list[FieldDecl],
                       methods: list[MethodDecl], nested: bool) -> Optional[RefactoringInstance]:
        removed = [m for m in b_cls.members if m.id not in self.before_to_after]
        removed_fields = {m.name: m for m in removed if isinstance(m, FieldDecl)}
        removed_methods = {signature(m): m for m in removed if isinstance(m, MethodDecl) and not m.is_constructor}
        if not all(f.name in removed_fields for f in fields) or not all(signature(m) in removed_methods for m in methods):
            return None
        wanted_fields = {f.name for f in fields}
        wanted_methods = {signature(m) for m in methods}
        moved = [
            self.before.nodes[m.id] for m in b_cls.members
            if (isinstance(m, FieldDecl) and m.name in wanted_fields)
            or (isinstance(m, MethodDecl) and not m.is_constructor and signature(m) in wanted_methods)
        ]
        delegate = next(
            (m.name for m in a_cls.members if isinstance(m, FieldDecl) and m.type_text == new.name
             and m.id not in self.after_to_before),
            new.name[:1].lower() + new.name[1:],
        )
        params = ExtractClassParams(
            source_class=class_path(self.before, self.before.nodes[b_cls.id]),
            moved_fields=[m.name for m in moved if isinstance(m, FieldDecl)],
            moved_methods=[signature(m) for m in moved if isinstance(m, MethodDecl)],
            new_class=new.name,
            delegate_field=delegate,
            nested=nested,
        )
        return RefactoringInstance.build("extract_class", params)

    # ---- precedence ----

    def _subsume(self, found: list[RefactoringInstance]) -> list[RefactoringInstance]:
        """Drop local renames inside a region that an extract or inline instance already accounts for."""
        regions: list[tuple[str, int, int]] = []
        inlined: set[str] = set()
        for r in found:
            if r.kind == "extract_method":
                spans = r.params["statements"]
                regions.append((r.params["source_method"], spans[0]["start_line"], spans[-1]["end_line"]))
            elif r.kind == "inline_method":
                inlined.add(r.params["method"])
        kept = []
        for r in found:
            if r.kind in ("rename_parameter", "rename_variable"):
                line = r.params["declaration"]["start_line"]
                if r.params["entity"] in inlined:
                    continue
                if any(path == r.params["entity"] and lo <= line <= hi for path, lo, hi in regions):
                    continue
            kept.append(r)
        return kept


def detect(before: SourceUnit, after: SourceUnit, config: Optional[DetectorConfig] = None) -> list[RefactoringInstance]:
    return Detector(before, after, config).detect()
