"""Precondition-checked refactoring engine.

Every kind is performed as an AST transformation that keeps the ids of the
nodes it does not create. After transforming, names are bound again and
compared against the bindings of the input unit, so a refactoring that would
capture or lose a reference is rejected instead of applied.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import logfire

from .ast_nodes import (
    Assign,
    ArrayAccess,
    Binary,
    Block,
    Break,
    Cast,
    Catch,
    ClassDecl,
    Continue,
    Expr,
    ExprStmt,
    FieldAccess,
    FieldDecl,
    For,
    ForEach,
    If,
    Literal,
    LocalVarDecl,
    Member,
    MethodCall,
    MethodDecl,
    Name,
    New,
    Node,
    OpaqueExpr,
    OpaqueMember,
    OpaqueStmt,
    ParamDecl,
    Return,
    Stmt,
    Ternary,
    Try,
    Unary,
    While,
    child_index_path,
    map_nodes,
    node_at,
    renumber,
    walk,
)
from .binder import EXTERNAL, BindingTarget, bind, iter_classes
from .config import EngineConfig
from .errors import NotInvertible, PreconditionFailed, UnknownEntity, UnsupportedKind
from .lexer import is_identifier
from .printer import precedence, print_expr
from .refactorings import (
    RENAME_KINDS,
    ExtractClassParams,
    ExtractMethodParams,
    ExtractVariableParams,
    InlineMethodParams,
    InlineVariableParams,
    LineSpan,
    PreconditionViolation,
    RefactoringInstance,
    RenameParams,
)
from .source_model import (
    SourceUnit,
    class_path,
    find_class,
    find_field,
    find_local,
    find_method,
    find_param,
    local_ordinal,
    method_path,
    rebuild,
    signature,
)

LOOP_TYPES = (While, For, ForEach)
_DECLS = (LocalVarDecl, ParamDecl)


# ---- shared helpers ----


def _violation(rule_id: str, message: str, node: Node) -> PreconditionViolation:
    return PreconditionViolation(rule_id=rule_id, message=message, span=LineSpan.of(node.span))


def _mentions(text: str, name: str) -> bool:
    return re.search(rf"(?<![\w$]){re.escape(name)}(?![\w$])", text) is not None


def _opaque_mention(root: Node, name: str) -> Optional[Node]:
    for node in walk(root):
        if isinstance(node, (OpaqueExpr, OpaqueStmt, OpaqueMember)) and _mentions(node.text, name):
            return node
    return None


def _outermost_class(unit: SourceUnit, node: Node) -> ClassDecl:
    outer = node if isinstance(node, ClassDecl) else None
    for ancestor in unit.ancestors(node):
        if isinstance(ancestor, ClassDecl):
            outer = ancestor
    return outer


def _declarations_in(root: Node) -> list[Union[LocalVarDecl, ParamDecl]]:
    return [n for n in walk(root) if isinstance(n, _DECLS)]


def _mutations(unit: SourceUnit, root: Node, decl_ids: set) -> list[Node]:
    """Assignments and increments in ``root`` whose target binds to one of ``decl_ids``."""
    out = []
    for node in walk(root):
        if isinstance(node, Assign):
            target = node.target
        elif isinstance(node, Unary) and node.op in ("++", "--"):
            target = node.operand
        else:
            continue
        if isinstance(target, (Name, FieldAccess)) and unit.binding_table.get(target.id) in decl_ids:
            out.append(node)
    return out


def _operand_decls(unit: SourceUnit, expr: Node) -> set:
    targets = set()
    for node in walk(expr):
        if isinstance(node, (Name, FieldAccess)):
            target = unit.binding_table.get(node.id, EXTERNAL)
            if target != EXTERNAL:
                targets.add(target)
    return targets


def _effects(expr: Node) -> tuple[bool, bool]:
    """(writes or allocates, calls a method) for an expression."""
    writes = calls = False
    for node in walk(expr):
        if isinstance(node, Assign) or (isinstance(node, Unary) and node.op in ("++", "--")):
            writes = True
        elif isinstance(node, New):
            writes = True
        elif isinstance(node, OpaqueExpr) and precedence(node) == 0:
            writes = True
        elif isinstance(node, MethodCall):
            calls = True
    return writes, calls


def _is_pure(expr: Node) -> bool:
    writes, calls = _effects(expr)
    return not writes and not calls


def _can_fail(expr: Node) -> bool:
    for node in walk(expr):
        if isinstance(node, (MethodCall, ArrayAccess, Cast)):
            return True
        if isinstance(node, FieldAccess) and not (isinstance(node.target, Literal) and node.target.text == "this"):
            return True
        if isinstance(node, Binary) and node.op in ("/", "%"):
            return True
    return False


def _ref_targets(unit: SourceUnit, expr: Node) -> tuple:
    return tuple(unit.binding_table.get(n.id) for n in walk(expr) if n.id in unit.binding_table)


def _statement_chain(unit: SourceUnit, node: Node) -> list[tuple[Block, Stmt]]:
    """(block, statement directly in that block) pairs around ``node``, innermost first."""
    chain: list[tuple[Block, Stmt]] = []
    child = node
    for ancestor in unit.ancestors(node):
        if isinstance(ancestor, Block) and isinstance(child, Stmt):
            chain.append((ancestor, child))
        if isinstance(ancestor, (MethodDecl, ClassDecl)):
            break
        child = ancestor
    return chain


def _innermost_statement(unit: SourceUnit, node: Node) -> Optional[Stmt]:
    for ancestor in [node, *unit.ancestors(node)]:
        if isinstance(ancestor, Stmt) and not isinstance(ancestor, Block):
            return ancestor
        if isinstance(ancestor, (MethodDecl, ClassDecl)):
            return None
    return None


def _index_of(stmts: tuple[Stmt, ...], node_id: int) -> int:
    return next(k for k, s in enumerate(stmts) if s.id == node_id)


def _is_write_target(unit: SourceUnit, ref: Node) -> bool:
    parent = unit.parent(ref)
    if isinstance(parent, Assign) and parent.target.id == ref.id:
        return True
    return isinstance(parent, Unary) and parent.op in ("++", "--")


class _Builder:
    """Creates nodes with fresh ids and records which declaration each new reference must bind to."""

    def __init__(self, unit: SourceUnit):
        self.unit = unit
        self._next = max(unit.nodes, default=0) + 1
        self.expected: dict[int, BindingTarget] = {}
        self.notes: dict[str, object] = {}

    def next_id(self) -> int:
        value = self._next
        self._next += 1
        return value

    def make(self, cls, *args, **kwargs):
        return cls(*args, id=self.next_id(), **kwargs)

    def copy(self, node: Node, images: Optional[dict[int, int]] = None) -> Node:
        mapping: dict[int, int] = {}
        copied = renumber(node, self.next_id, mapping)
        images = {**(images or {}), **mapping}
        for old_id, new_id in mapping.items():
            if old_id in self.expected:
                target = self.expected[old_id]
            elif old_id in self.unit.binding_table:
                target = self.unit.binding_table[old_id]
            else:
                continue
            self.expected[new_id] = target if target == EXTERNAL else images.get(target, target)
        return copied


def _verify_bindings(unit: SourceUnit, types: tuple[ClassDecl, ...], builder: _Builder,
                     rule_id: str) -> list[PreconditionViolation]:
    table = bind(types)
    index = {n.id: n for cls in types for n in walk(cls)}
    problems: list[PreconditionViolation] = []
    seen = set()
    for ref_id, target in table.items():
        if ref_id in builder.expected:
            want = builder.expected[ref_id]
        elif ref_id in unit.binding_table:
            want = unit.binding_table[ref_id]
        else:
            continue
        if target == want:
            continue
        ref = index[ref_id]
        if (ref.name, ref.span.start_line) in seen:
            continue
        seen.add((ref.name, ref.span.start_line))
        problems.append(_violation(rule_id, f"reference to {ref.name!r} would bind differently", ref))
    return problems


def _map_types(types: tuple[ClassDecl, ...], fn: Callable[[Node], Optional[Node]]) -> tuple[ClassDecl, ...]:
    return tuple(map_nodes(cls, fn) for cls in types)


@dataclass
class _Outcome:
    violations: list[PreconditionViolation] = field(default_factory=list)
    types: Optional[tuple[ClassDecl, ...]] = None
    builder: Optional[_Builder] = None


# ---- rename_* ----


def rename_target(unit: SourceUnit, kind: str, p: RenameParams) -> Node:
    if kind == "rename_attribute":
        return find_field(unit, p.entity, p.old_name)
    if kind == "rename_method":
        cls = find_class(unit, p.entity)
        for member in cls.members:
            if isinstance(member, MethodDecl) and not member.is_constructor and member.name == p.old_name:
                types = [t.replace(" ", "") for t in member.param_types]
                if p.param_types is None or types == p.param_types:
                    return member
        raise UnknownEntity(f"no method {p.old_name!r} in {p.entity!r}")
    method = find_method(unit, p.entity)
    if kind == "rename_parameter":
        return find_param(method, p.old_name)
    return find_local(method, p.old_name, p.ordinal)


def _rename(unit: SourceUnit, kind: str, p: RenameParams, config: EngineConfig) -> _Outcome:
    decl = rename_target(unit, kind, p)
    out = _Outcome()
    if p.old_name == p.new_name:
        out.types = unit.types
        out.builder = _Builder(unit)
        return out
    if not is_identifier(p.new_name):
        out.violations.append(_violation("rename.invalid-identifier", f"{p.new_name!r} is not an identifier", decl))
        return out
    if kind in ("rename_attribute", "rename_method"):
        cls = unit.enclosing(decl, ClassDecl)
        scope: Node = _outermost_class(unit, cls)
        for member in cls.members:
            if member.id == decl.id:
                continue
            if kind == "rename_attribute" and isinstance(member, FieldDecl) and member.name == p.new_name:
                out.violations.append(_violation("rename.collision", f"field {p.new_name!r} already exists", member))
            if (kind == "rename_method" and isinstance(member, MethodDecl) and member.name == p.new_name
                    and member.param_types == decl.param_types):
                out.violations.append(_violation("rename.collision", f"method {p.new_name!r} already exists", member))
        if kind == "rename_method" and "@Override" in decl.modifiers.split():
            out.violations.append(_violation("rename.override", "renaming an overriding method breaks the override", decl))
    else:
        method = unit.enclosing(decl, MethodDecl)
        scope = method
        for other in _declarations_in(method):
            if other.id != decl.id and other.name == p.new_name:
                out.violations.append(_violation("rename.collision", f"{p.new_name!r} is already declared in the method", other))
    mention = _opaque_mention(scope, p.old_name)
    if mention is not None:
        out.violations.append(_violation("rename.opaque-reference", f"{p.old_name!r} appears in unparsed code", mention))
    if out.violations:
        return out
    ids = {decl.id} | {ref.id for ref in unit.refs_to(decl)}
    out.types = _map_types(unit.types, lambda n: replace(n, name=p.new_name) if n.id in ids else None)
    out.builder = _Builder(unit)
    out.violations = _verify_bindings(unit, out.types, out.builder, "rename.capture")
    return out


# ---- extract_variable ----


def expression_occurrences(method: MethodDecl, expression: str) -> list[Expr]:
    """Expressions in the method body that print as ``expression``, in source order."""
    if method.body is None:
        return []
    return [n for n in walk(method.body) if isinstance(n, Expr) and print_expr(n) == expression]


@dataclass
class _Insertion:
    block: Block
    stmt: Stmt


def insertion_candidates(unit: SourceUnit, occurrences: list[Expr]) -> list[_Insertion]:
    """Places a declaration covering all occurrences may go, innermost (default) first."""
    chains = [list(reversed(_statement_chain(unit, occ))) for occ in occurrences]
    if any(not chain for chain in chains):
        return []
    first = chains[0]
    common = 0
    while all(len(c) > common and c[common][0].id == first[common][0].id for c in chains):
        common += 1
    candidates: list[_Insertion] = []
    for depth in range(common - 1, -1, -1):
        block, stmt = first[depth]
        upto = _index_of(block.stmts, stmt.id)
        candidates.append(_Insertion(block, stmt))
        for earlier in reversed(block.stmts[:upto]):
            candidates.append(_Insertion(block, earlier))
    return candidates


def _guarded(unit: SourceUnit, occurrence: Node, stop: Stmt) -> bool:
    child = occurrence
    for ancestor in unit.ancestors(occurrence):
        if isinstance(ancestor, If) and child.id != ancestor.cond.id:
            return True
        if isinstance(ancestor, Ternary) and child.id != ancestor.cond.id:
            return True
        if isinstance(ancestor, Binary) and ancestor.op in ("&&", "||") and child.id == ancestor.right.id:
            return True
        if ancestor.id == stop.id:
            return False
        child = ancestor
    return False


def _loops_between(unit: SourceUnit, node: Node, stop: Stmt) -> list[Node]:
    loops = []
    for ancestor in unit.ancestors(node):
        if isinstance(ancestor, LOOP_TYPES):
            loops.append(ancestor)
        if ancestor.id == stop.id:
            break
    return loops


def _extract_variable(unit: SourceUnit, p: ExtractVariableParams, config: EngineConfig) -> _Outcome:
    method = find_method(unit, p.method)
    found = expression_occurrences(method, p.expression)
    indices = p.occurrence_indices or list(range(len(found)))
    if not found or any(k < 0 or k >= len(found) for k in indices):
        raise UnknownEntity(f"expression {p.expression!r} does not occur as requested in {p.method!r}")
    occurrences = [found[k] for k in sorted(set(indices))]
    first = occurrences[0]
    out = _Outcome()
    if not is_identifier(p.new_name):
        out.violations.append(_violation("extract_variable.invalid-identifier", f"{p.new_name!r} is not an identifier", first))
    for other in _declarations_in(method):
        if other.name == p.new_name:
            out.violations.append(_violation("extract_variable.collision", f"{p.new_name!r} is already declared in the method", other))
    writes, calls = _effects(first)
    if writes:
        out.violations.append(_violation("extract_variable.side-effect", "expression writes, allocates or is unparsed", first))
    elif calls:
        if config.strict:
            out.violations.append(_violation("extract_variable.method-call", "expression calls a method", first))
        else:
            logfire.warn("extract_variable over a method call", expression=p.expression, method=p.method)
    bindings = _ref_targets(unit, first)
    for occ in occurrences:
        if _is_write_target(unit, occ):
            out.violations.append(_violation("extract_variable.lvalue", "occurrence is assigned to", occ))
        if _ref_targets(unit, occ) != bindings:
            out.violations.append(_violation("extract_variable.different-bindings", "occurrences refer to different declarations", occ))
    candidates = insertion_candidates(unit, occurrences)
    if not candidates:
        out.violations.append(_violation("extract_variable.no-insertion-point", "occurrence is not inside a method block", first))
        return out
    insertion = next((c for c in candidates if p.insertion_point.covers(c.stmt.span)), candidates[0])
    if _can_fail(first) and _guarded(unit, first, insertion.stmt):
        out.violations.append(_violation("extract_variable.conditional-evaluation",
                                         "expression would be evaluated outside the condition guarding it", first))
    operands = _operand_decls(unit, first)
    mutations = _mutations(unit, method.body, operands)
    last_start = max(o.span.start_offset for o in occurrences)
    for mutation in mutations:
        if insertion.stmt.span.start_offset <= mutation.span.start_offset and mutation.span.end_offset <= last_start:
            out.violations.append(_violation("extract_variable.operand-mutated", "an operand changes between occurrences", mutation))
    for occ in occurrences:
        for loop in _loops_between(unit, occ, insertion.stmt):
            for mutation in mutations:
                if loop.span.contains(mutation.span):
                    out.violations.append(_violation("extract_variable.operand-mutated", "an operand changes inside the loop", mutation))
    if out.violations:
        out.violations = list(dict.fromkeys(out.violations))
        return out

    b = _Builder(unit)
    decl = b.make(LocalVarDecl, p.modifiers, p.type_text, p.new_name, b.copy(first))
    occurrence_ids = {o.id for o in occurrences}

    def fn(n: Node) -> Optional[Node]:
        if n.id in occurrence_ids:
            ref = b.make(Name, p.new_name, span=n.span)
            b.expected[ref.id] = decl.id
            return ref
        if n.id == insertion.block.id:
            stmts = list(n.stmts)
            stmts.insert(_index_of(n.stmts, insertion.stmt.id), decl)
            return replace(n, stmts=tuple(stmts))
        return None

    out.types = _map_types(unit.types, fn)
    out.builder = b
    out.violations = _verify_bindings(unit, out.types, b, "extract_variable.capture")
    return out


# ---- inline_variable ----


def _inline_variable(unit: SourceUnit, p: InlineVariableParams, config: EngineConfig) -> _Outcome:
    method = find_method(unit, p.method)
    decl = find_local(method, p.variable, p.ordinal)
    out = _Outcome()
    block = unit.parent(decl)
    if not isinstance(block, Block):
        out.violations.append(_violation("inline.unsupported-declaration", "declaration is not a block statement", decl))
        return out
    if decl.init is None:
        out.violations.append(_violation("inline.no-initializer", f"{decl.name!r} has no initializer", decl))
        return out
    uses = unit.refs_to(decl)
    for use in uses:
        if _is_write_target(unit, use):
            out.violations.append(_violation("inline.reassigned", f"{decl.name!r} is assigned after its declaration", use))
    mention = _opaque_mention(method, decl.name)
    if mention is not None:
        out.violations.append(_violation("inline.opaque-reference", f"{decl.name!r} appears in unparsed code", mention))
    writes, calls = _effects(decl.init)
    if writes and len(uses) != 1:
        out.violations.append(_violation("inline.side-effect", "initializer has side effects", decl))
    elif calls and not uses:
        out.violations.append(_violation("inline.side-effect", "initializer call would be dropped", decl))
    elif calls and len(uses) > 1:
        if config.strict:
            out.violations.append(_violation("inline.duplicated-call", "initializer call would run once per use", decl))
        else:
            logfire.warn("inline_variable duplicates a call", variable=decl.name, uses=len(uses))
    if isinstance(decl.init, OpaqueExpr) and precedence(decl.init) == 0:
        for use in uses:
            if isinstance(unit.parent(use), Expr):
                out.violations.append(_violation("inline.opaque-initializer", "unparsed initializer cannot be nested", use))
    mutations = _mutations(unit, method.body, _operand_decls(unit, decl.init))
    for use in uses:
        for mutation in mutations:
            if decl.span.end_offset <= mutation.span.start_offset and mutation.span.end_offset <= use.span.start_offset:
                out.violations.append(_violation("inline.operand-mutated", "an initializer operand changes before a use", mutation))
        for loop in unit.ancestors(use):
            if isinstance(loop, LOOP_TYPES) and not loop.span.contains(decl.span):
                for mutation in mutations:
                    if loop.span.contains(mutation.span):
                        out.violations.append(_violation("inline.operand-mutated", "an initializer operand changes inside the loop", mutation))
    if out.violations:
        out.violations = list(dict.fromkeys(out.violations))
        return out

    b = _Builder(unit)
    use_ids = {u.id for u in uses}

    def fn(n: Node) -> Optional[Node]:
        if n.id in use_ids:
            return b.copy(decl.init)
        if n.id == block.id:
            return replace(n, stmts=tuple(s for s in n.stmts if s.id != decl.id))
        return None

    out.types = _map_types(unit.types, fn)
    out.builder = b
    out.violations = _verify_bindings(unit, out.types, b, "inline.capture")
    return out


# ---- extract_method ----


def statement_range(method: MethodDecl, spans: list[LineSpan]) -> tuple[Block, int, int]:
    if method.body is not None and spans:
        for block in walk(method.body):
            if not isinstance(block, Block):
                continue
            for start in range(len(block.stmts) - len(spans) + 1):
                if all(spans[k].covers(block.stmts[start + k].span) for k in range(len(spans))):
                    return block, start, start + len(spans)
    raise UnknownEntity(f"statements {[s.model_dump() for s in spans]} are not a statement range of {method.name!r}")


@dataclass
class RangeAnalysis:
    block: Block
    region: list[Stmt]
    inputs: list[Union[LocalVarDecl, ParamDecl]]
    live_out: list[Union[LocalVarDecl, ParamDecl]]
    live_inside: bool
    jumps: list[Node]


def analyze_range(unit: SourceUnit, method: MethodDecl, block: Block, start: int, end: int) -> RangeAnalysis:
    region = list(block.stmts[start:end])
    region_ids = {n.id for s in region for n in walk(s)}
    region_end = region[-1].span.end_offset
    method_decls = {d.id: d for d in _declarations_in(method)}
    declared_inside = {n.id for s in region for n in walk(s) if isinstance(n, _DECLS)}
    inputs: dict[int, Union[LocalVarDecl, ParamDecl]] = {}
    assigned: set[int] = set()
    jumps: list[Node] = []
    for stmt in region:
        for node in walk(stmt):
            if isinstance(node, Name):
                target = unit.binding_table.get(node.id)
                if target in method_decls and target not in declared_inside:
                    inputs.setdefault(target, method_decls[target])
                    if _is_write_target(unit, node):
                        assigned.add(target)
            elif isinstance(node, Return):
                jumps.append(node)
            elif isinstance(node, (Break, Continue)):
                if node.label or not any(
                    isinstance(a, LOOP_TYPES) and a.id in region_ids for a in unit.ancestors(node)
                ):
                    jumps.append(node)
            elif isinstance(node, OpaqueStmt) and any(_mentions(node.text, w) for w in ("return", "continue", "yield")):
                jumps.append(node)
            elif isinstance(node, MethodCall) and node.target is None and node.name in ("this", "super"):
                jumps.append(node)
    loops = [a for a in unit.ancestors(block) if isinstance(a, LOOP_TYPES)]
    innermost_loop = loops[0] if loops else None

    def used_outside(decl_id: int, after_only: bool) -> bool:
        for ref in unit.refs_to(method_decls[decl_id]):
            if ref.id in region_ids:
                continue
            if not after_only or ref.span.start_offset >= region_end:
                return True
            if innermost_loop is not None and innermost_loop.span.contains(ref.span):
                return True
        return False

    live_out: list[Union[LocalVarDecl, ParamDecl]] = []
    live_inside = False
    for stmt in region:
        if isinstance(stmt, LocalVarDecl) and used_outside(stmt.id, after_only=False):
            live_out.append(stmt)
            live_inside = True
    for decl_id in assigned:
        if used_outside(decl_id, after_only=True):
            live_out.append(method_decls[decl_id])
    return RangeAnalysis(block, region, list(inputs.values()), live_out, live_inside, jumps)


def _extract_method(unit: SourceUnit, p: ExtractMethodParams, config: EngineConfig) -> _Outcome:
    method = find_method(unit, p.source_method)
    cls = unit.enclosing(method, ClassDecl)
    block, start, end = statement_range(method, p.statements)
    info = analyze_range(unit, method, block, start, end)
    anchor = info.region[0]
    out = _Outcome()
    for name in [p.new_name, *p.parameters]:
        if not is_identifier(name):
            out.violations.append(_violation("extract_method.invalid-identifier", f"{name!r} is not an identifier", anchor))
    if len(set(p.parameters)) != len(p.parameters) or len(p.parameters) != len(p.arguments):
        out.violations.append(_violation("extract_method.parameter-mismatch", "parameter names do not line up with arguments", anchor))
    for member in cls.members:
        if isinstance(member, MethodDecl) and member.name == p.new_name and len(member.params) == len(p.arguments):
            out.violations.append(_violation("extract_method.collision", f"method {p.new_name!r} already exists", member))
    for jump in info.jumps:
        out.violations.append(_violation("extract_method.escaping-jump", f"{jump.kind} leaves the extracted range", jump))
    if len(info.live_out) > 1:
        names = ", ".join(d.name for d in info.live_out)
        out.violations.append(_violation("extract_method.live-out", f"several variables are used after the range: {names}", anchor))
    required = sorted(d.name for d in info.inputs)
    if sorted(p.arguments) != required:
        out.violations.append(_violation("extract_method.parameter-mismatch",
                                         f"range needs arguments {required}, got {sorted(p.arguments)}", anchor))
    live = info.live_out[0] if len(info.live_out) == 1 else None
    if (live.name if live else None) != p.return_variable:
        out.violations.append(_violation("extract_method.return-mismatch",
                                         f"range returns {live.name if live else None!r}, not {p.return_variable!r}", anchor))
    for decl in info.inputs + info.live_out:
        if decl.type_text == "var":
            out.violations.append(_violation("extract_method.untyped-variable", f"{decl.name!r} has no declared type", decl))
    if "static" in method.modifiers.split() and "static" not in p.modifiers.split():
        out.violations.append(_violation("extract_method.static-context", "extracted from a static method", anchor))
    if out.violations:
        out.violations = list(dict.fromkeys(out.violations))
        return out

    b = _Builder(unit)
    by_name = {d.name: d for d in info.inputs}
    params = [b.make(ParamDecl, "", by_name[a].type_text, pn) for a, pn in zip(p.arguments, p.parameters)]
    param_of = {by_name[a].id: param for a, param in zip(p.arguments, params)}

    def to_param(n: Node) -> Optional[Node]:
        if isinstance(n, Name) and unit.binding_table.get(n.id) in param_of:
            param = param_of[unit.binding_table[n.id]]
            b.expected[n.id] = param.id
            return replace(n, name=param.name)
        return None

    moved = [map_nodes(s, to_param) for s in info.region]
    method_id = b.next_id()
    args = []
    for a in p.arguments:
        arg = b.make(Name, a)
        b.expected[arg.id] = by_name[a].id
        args.append(arg)
    call = b.make(MethodCall, None, p.new_name, tuple(args))
    b.expected[call.id] = method_id
    return_type = "void"
    if live is None:
        body = moved
        call_stmt: Stmt = b.make(ExprStmt, call)
    elif info.live_inside:
        return_type = live.type_text
        last = moved[-1]
        if isinstance(last, LocalVarDecl) and last.id == live.id and last.init is not None:
            body = moved[:-1] + [b.make(Return, last.init)]
        else:
            result = b.make(Name, live.name)
            b.expected[result.id] = live.id
            body = moved + [b.make(Return, result)]
        call_stmt = b.make(LocalVarDecl, live.modifiers, live.type_text, live.name, call)
        for ref in unit.refs_to(live):
            if ref.span.start_offset >= info.region[-1].span.end_offset:
                b.expected[ref.id] = call_stmt.id
    else:
        return_type = live.type_text
        param = param_of[live.id]
        result = b.make(Name, param.name)
        b.expected[result.id] = param.id
        body = moved + [b.make(Return, result)]
        target = b.make(Name, live.name)
        b.expected[target.id] = live.id
        call_stmt = b.make(ExprStmt, b.make(Assign, "=", target, call))
    new_method = MethodDecl(
        p.modifiers, method.type_params, return_type, p.new_name, tuple(params), p.throws,
        b.make(Block, tuple(body)), id=method_id,
    )
    region_ids = [s.id for s in info.region]

    def fn(n: Node) -> Optional[Node]:
        if n.id == block.id:
            k = _index_of(n.stmts, region_ids[0])
            return replace(n, stmts=n.stmts[:k] + (call_stmt,) + n.stmts[k + len(region_ids):])
        if n.id == cls.id:
            members = list(n.members)
            index = p.position if p.position is not None else _index_of(n.members, method.id) + 1
            members.insert(min(index, len(members)), new_method)
            return replace(n, members=tuple(members))
        return None

    out.types = _map_types(unit.types, fn)
    out.builder = b
    out.violations = _verify_bindings(unit, out.types, b, "extract_method.capture")
    return out


# ---- inline_method ----


def _binding_of(b: _Builder, ref_id: int) -> BindingTarget:
    if ref_id in b.expected:
        return b.expected[ref_id]
    return b.unit.binding_table.get(ref_id, EXTERNAL)


def _conflicting_names(unit: SourceUnit, caller: MethodDecl, stmt: Stmt) -> set[str]:
    names = {param.name for param in caller.params}
    child: Node = stmt
    for ancestor in unit.ancestors(stmt):
        if isinstance(ancestor, Block):
            k = _index_of(ancestor.stmts, child.id)
            for s in ancestor.stmts[:k]:
                if isinstance(s, LocalVarDecl):
                    names.add(s.name)
            for s in ancestor.stmts[k + 1:]:
                for node in walk(s):
                    if isinstance(node, _DECLS):
                        names.add(node.name)
                    elif isinstance(node, Name) and not isinstance(unit.target_of(node), _DECLS):
                        names.add(node.name)
        elif isinstance(ancestor, For):
            names.update(s.name for s in ancestor.init if isinstance(s, LocalVarDecl))
        elif isinstance(ancestor, ForEach):
            names.add(ancestor.var.name)
        elif isinstance(ancestor, Catch):
            names.add(ancestor.param.name)
        elif isinstance(ancestor, Try):
            names.update(r.name for r in ancestor.resources if isinstance(r, LocalVarDecl))
        if ancestor.id == caller.id:
            break
        child = ancestor
    return names


def _fresh_name(name: str, taken: set[str]) -> str:
    k = 1
    while f"{name}_{k}" in taken:
        k += 1
    return f"{name}_{k}"


def _inline_method(unit: SourceUnit, p: InlineMethodParams, config: EngineConfig) -> _Outcome:
    method = find_method(unit, p.method)
    cls = unit.enclosing(method, ClassDecl)
    out = _Outcome()
    if method.body is None or method.is_constructor:
        out.violations.append(_violation("inline_method.no-body", "only methods with a body can be inlined", method))
        return out
    calls = unit.refs_to(method)
    if not calls:
        out.violations.append(_violation("inline_method.unused", f"{method.name!r} has no call sites in the document", method))
    for call in calls:
        if method.span.contains(call.span):
            out.violations.append(_violation("inline_method.recursive", f"{method.name!r} calls itself", call))
        elif not isinstance(call, MethodCall) or not (
            call.target is None or (isinstance(call.target, Literal) and call.target.text == "this")
        ):
            out.violations.append(_violation("inline_method.qualified-call", "call goes through another receiver", call))
    returns = [n for n in walk(method.body) if isinstance(n, Return)]
    stmts = method.body.stmts
    tail = stmts[-1] if stmts and isinstance(stmts[-1], Return) else None
    void = method.return_type == "void"
    if [r.id for r in returns] not in ([], [tail.id] if tail is not None else []):
        out.violations.append(_violation("inline_method.multiple-returns", "only a single final return can be inlined", method))
    elif not void and (tail is None or tail.value is None):
        out.violations.append(_violation("inline_method.multiple-returns", "method does not end with a return", method))
    if any("..." in t for t in method.param_types):
        out.violations.append(_violation("inline_method.varargs", "varargs parameters are not inlined", method))
    if "@Override" in method.modifiers.split():
        out.violations.append(_violation("inline_method.override", "inlining removes an override", method))
    mention = _opaque_mention(_outermost_class(unit, cls), method.name)
    if mention is not None:
        out.violations.append(_violation("inline_method.opaque-reference", f"{method.name!r} appears in unparsed code", mention))
    if out.violations:
        return out

    b = _Builder(unit)
    core = list(stmts[:-1]) if tail is not None else list(stmts)
    assigned_params = {
        unit.binding_table.get(ref.id) for param in method.params for ref in unit.refs_to(param) if _is_write_target(unit, ref)
    }
    stmt_replacements: dict[int, list[Stmt]] = {}
    expr_replacements: dict[int, Node] = {}
    statements_seen: set[int] = set()
    layout = []
    for call in calls:
        caller = unit.enclosing(call, MethodDecl)
        stmt = _innermost_statement(unit, call)
        if caller is None or stmt is None:
            out.violations.append(_violation("inline_method.complex-call-site", "call is not inside a method body", call))
            continue
        if unit.enclosing(caller, ClassDecl).id != cls.id:
            out.violations.append(_violation("inline_method.foreign-call-site", "call site is in another class", call))
            continue
        if "static" in caller.modifiers.split() and "static" not in method.modifiers.split():
            out.violations.append(_violation("inline_method.static-context", "instance method called from a static method", call))
            continue
        if stmt.id in statements_seen or any(
            isinstance(n, MethodCall) and n.id != call.id and unit.binding_table.get(n.id) == method.id for n in walk(stmt)
        ):
            out.violations.append(_violation("inline_method.complex-call-site", "several calls in one statement", call))
            continue
        statements_seen.add(stmt.id)
        if isinstance(stmt, ExprStmt) and stmt.expr.id == call.id:
            form = "stmt"
        elif isinstance(stmt, LocalVarDecl) and stmt.init is not None and stmt.init.id == call.id:
            form = "decl"
        elif (isinstance(stmt, ExprStmt) and isinstance(stmt.expr, Assign) and stmt.expr.op == "="
              and stmt.expr.value.id == call.id):
            form = "assign"
        elif isinstance(stmt, Return) and stmt.value is not None and stmt.value.id == call.id:
            form = "return"
        else:
            form = "nested"
        if void and form != "stmt":
            out.violations.append(_violation("inline_method.complex-call-site", "void call used as a value", call))
            continue

        taken = _conflicting_names(unit, caller, stmt)
        result_local = None
        if form == "decl" and tail is not None and isinstance(tail.value, Name):
            bound = unit.target_of(tail.value)
            if isinstance(bound, LocalVarDecl) and any(s.id == bound.id for s in core) and bound.name == stmt.name:
                result_local = bound
                taken.discard(stmt.name)
        body_names = {d.name for d in _declarations_in(method.body)} | {prm.name for prm in method.params}

        # parameters: substitute the argument or bind it to a temporary local
        substitution: dict[int, Node] = {}
        temps: list[LocalVarDecl] = []
        for param, arg in zip(method.params, call.args):
            uses = len(unit.refs_to(param))
            self_assign = (
                form == "assign" and isinstance(arg, Name) and isinstance(stmt.expr.target, Name)
                and stmt.expr.target.name == arg.name and isinstance(tail.value, Name)
                and unit.binding_table.get(tail.value.id) == param.id
                and unit.binding_table.get(stmt.expr.target.id) == unit.binding_table.get(arg.id)
            )
            simple = isinstance(arg, (Name, Literal)) or (_is_pure(arg) and uses <= 1)
            if (param.id not in assigned_params and simple and (uses or _is_pure(arg))) or self_assign:
                substitution[param.id] = arg
            else:
                name = param.name if param.name not in taken else _fresh_name(param.name, taken | body_names)
                taken.add(name)
                temp = b.make(LocalVarDecl, "", param.type_text, name, b.copy(arg))
                temps.append(temp)
                substitution[param.id] = temp
        renames: dict[int, str] = {}
        for decl in _declarations_in(method.body):
            if decl.name in taken and (result_local is None or decl.id != result_local.id):
                new_name = _fresh_name(decl.name, taken | body_names)
                taken.add(new_name)
                renames[decl.id] = new_name

        copies: list[Stmt] = []
        images: dict[int, int] = {}
        for s in core:
            mapping: dict[int, int] = {}
            copied = renumber(s, b.next_id, mapping)
            images.update(mapping)
            copies.append(copied)
        # second pass: expectations for the copied references now that every copied declaration has an image
        for old_id, new_id in images.items():
            if old_id in unit.binding_table:
                target = unit.binding_table[old_id]
                b.expected[new_id] = target if target == EXTERNAL else images.get(target, target)
        renamed_images = {images[k]: v for k, v in renames.items() if k in images}
        param_images = {param.id: param.id for param in method.params}

        def substitute(n: Node) -> Optional[Node]:
            target = _binding_of(b, n.id)
            if isinstance(n, Name) and target in param_images and target in substitution:
                repl = substitution[target]
                if isinstance(repl, LocalVarDecl):
                    b.expected[n.id] = repl.id
                    return replace(n, name=repl.name)
                return b.copy(repl)
            if isinstance(n, _DECLS) and n.id in renamed_images:
                return replace(n, name=renamed_images[n.id])
            if isinstance(n, Name) and target in renamed_images:
                return replace(n, name=renamed_images[target])
            return None

        body_copy = [map_nodes(s, substitute) for s in copies]
        value = None
        if tail is not None:
            value_mapping: dict[int, int] = {}
            value = renumber(tail.value, b.next_id, value_mapping)
            for old_id, new_id in value_mapping.items():
                if old_id in unit.binding_table:
                    target = unit.binding_table[old_id]
                    b.expected[new_id] = target if target == EXTERNAL else images.get(target, target)
            value = map_nodes(value, substitute)

        replacement: list[Stmt] = [*temps, *body_copy]
        if form == "nested":
            if replacement:
                out.violations.append(_violation("inline_method.complex-call-site", "call inside an expression needs a single-return body", call))
                continue
            expr_replacements[call.id] = value
            parent = unit.parent(stmt)
            if isinstance(parent, Block):
                layout.append((parent.id, _index_of(parent.stmts, stmt.id), 1))
            continue
        if form == "stmt":
            if value is not None and not _is_pure(value):
                if not isinstance(value, (MethodCall, Assign, Unary)):
                    out.violations.append(_violation("inline_method.complex-call-site", "returned expression is not a statement", call))
                    continue
                replacement.append(b.make(ExprStmt, value))
        elif form == "decl":
            if result_local is not None:
                image = images[result_local.id]
                for ref in unit.refs_to(stmt):
                    b.expected[ref.id] = image
            else:
                replacement.append(replace(stmt, init=value))
        elif form == "assign":
            if not (isinstance(value, Name) and print_expr(value) == print_expr(stmt.expr.target)):
                replacement.append(replace(stmt, expr=replace(stmt.expr, value=value)))
        else:
            replacement.append(replace(stmt, value=value))
        stmt_replacements[stmt.id] = replacement
        parent = unit.parent(stmt)
        if isinstance(parent, Block):
            layout.append((parent.id, _index_of(parent.stmts, stmt.id), len(replacement)))
    if out.violations:
        return out
    b.notes["layout"] = layout

    def fn(n: Node) -> Optional[Node]:
        if n.id in expr_replacements:
            return expr_replacements[n.id]
        if isinstance(n, Block) and any(s.id in stmt_replacements for s in n.stmts):
            new_stmts: list[Stmt] = []
            for s in n.stmts:
                new_stmts.extend(stmt_replacements.get(s.id, [s]))
            return replace(n, stmts=tuple(new_stmts))
        if isinstance(n, Stmt) and n.id in stmt_replacements and not isinstance(unit.parent(unit.nodes[n.id]), Block):
            replacement = stmt_replacements[n.id]
            return replacement[0] if len(replacement) == 1 else b.make(Block, tuple(replacement))
        if n.id == cls.id:
            return replace(n, members=tuple(m for m in n.members if m.id != method.id))
        return None

    out.types = _map_types(unit.types, fn)
    out.builder = b
    out.violations = _verify_bindings(unit, out.types, b, "inline_method.capture")
    return out


# ---- extract_class ----


def _method_by_signature(cls: ClassDecl, sig: str) -> MethodDecl:
    for member in cls.members:
        if isinstance(member, MethodDecl) and not member.is_constructor and signature(member) == sig:
            return member
    raise UnknownEntity(f"no method {sig!r} in {cls.name!r}")


def _extract_class(unit: SourceUnit, p: ExtractClassParams, config: EngineConfig) -> _Outcome:
    source = find_class(unit, p.source_class)
    fields_ = [find_field(unit, p.source_class, name) for name in p.moved_fields]
    methods = [_method_by_signature(source, sig) for sig in p.moved_methods]
    moved: list[Member] = [m for m in source.members if m.id in {x.id for x in fields_ + methods}]
    out = _Outcome()
    anchor: Node = moved[0] if moved else source
    if not moved:
        out.violations.append(_violation("extract_class.empty", "nothing to move", source))
        return out
    for name in (p.new_class, p.delegate_field):
        if not is_identifier(name):
            out.violations.append(_violation("extract_class.invalid-identifier", f"{name!r} is not an identifier", anchor))
    if any(c.name == p.new_class for c in iter_classes(unit.types)):
        out.violations.append(_violation("extract_class.collision", f"class {p.new_class!r} already exists", anchor))
    for member in source.members:
        if isinstance(member, (FieldDecl, MethodDecl)) and member.name == p.delegate_field:
            out.violations.append(_violation("extract_class.collision", f"{p.delegate_field!r} already exists", member))
    moved_ids = {m.id for m in moved}
    outer_members = set()
    for ancestor in [source, *unit.ancestors(source)]:
        if isinstance(ancestor, ClassDecl):
            outer_members.update(m.id for m in ancestor.members if isinstance(m, (FieldDecl, MethodDecl)))
    for member in moved:
        if "static" in member.modifiers.split():
            out.violations.append(_violation("extract_class.static-member", f"{member.name!r} is static", member))
        if "@Override" in member.modifiers.split():
            out.violations.append(_violation("extract_class.override", f"{member.name!r} overrides a method", member))
        for node in walk(member):
            target = unit.binding_table.get(node.id)
            if target in outer_members and target not in moved_ids:
                out.violations.append(_violation("extract_class.references-unmoved",
                                                 f"{node.name!r} stays in {source.name!r}", node))
            if isinstance(node, Literal) and node.text in ("this", "super") and not (
                isinstance(unit.parent(node), FieldAccess) and unit.target_of(unit.parent(node)) is not None
                and unit.target_of(unit.parent(node)).id in moved_ids
            ) and not (isinstance(unit.parent(node), MethodCall) and unit.binding_table.get(unit.parent(node).id) in moved_ids):
                out.violations.append(_violation("extract_class.references-unmoved", f"{node.text!r} escapes the moved members", node))
        for ref in unit.refs_to(member):
            owner = unit.enclosing(ref, ClassDecl)
            inside = owner is not None and (owner.id == source.id or source.span.contains(owner.span))
            if not inside:
                out.violations.append(_violation("extract_class.external-reference", f"{member.name!r} is used outside {source.name!r}", ref))
            elif isinstance(ref, (FieldAccess, MethodCall)) and ref.target is not None and not (
                isinstance(ref.target, Literal) and ref.target.text == "this"
            ):
                out.violations.append(_violation("extract_class.qualified-reference", f"{member.name!r} is reached through another receiver", ref))
        remaining = [m for m in source.members if m.id not in moved_ids]
        for other in remaining:
            mention = _opaque_mention(other, member.name)
            if mention is not None:
                out.violations.append(_violation("extract_class.opaque-reference", f"{member.name!r} appears in unparsed code", mention))
    if out.violations:
        out.violations = list(dict.fromkeys(out.violations))
        return out

    b = _Builder(unit)
    stripped = [replace(m, modifiers=" ".join(w for w in m.modifiers.split() if w != "private")) for m in moved]
    new_class = b.make(ClassDecl, "static" if p.nested else "", "class", p.new_class, "", tuple(stripped))
    delegate = b.make(FieldDecl, "private final", p.new_class, p.delegate_field, b.make(New, p.new_class, ()))

    def through_delegate(n: Node) -> Optional[Node]:
        target = unit.binding_table.get(n.id)
        if target not in moved_ids:
            return None
        receiver = b.make(Name, p.delegate_field)
        b.expected[receiver.id] = delegate.id
        if isinstance(n, Name):
            return FieldAccess(receiver, n.name, span=n.span, id=n.id)
        return replace(n, target=receiver)

    members: list[Member] = []
    for member in source.members:
        if member.id == moved[0].id:
            members.append(delegate)
        if member.id not in moved_ids:
            members.append(map_nodes(member, through_delegate))
    if p.nested:
        members.append(new_class)
    outer = _outermost_class(unit, source)

    def fn(n: Node) -> Optional[Node]:
        if n.id == source.id:
            return replace(n, members=tuple(members))
        return None

    types = list(_map_types(unit.types, fn))
    if not p.nested:
        types.insert(_index_of(unit.types, outer.id) + 1, new_class)
    out.types = tuple(types)
    out.builder = b
    out.violations = _verify_bindings(unit, out.types, b, "extract_class.binding-changed")
    return out


# ---- public API ----

_HANDLERS = {
    "rename_attribute": _rename,
    "rename_method": _rename,
    "rename_parameter": _rename,
    "rename_variable": _rename,
    "extract_variable": _extract_variable,
    "inline_variable": _inline_variable,
    "extract_method": _extract_method,
    "inline_method": _inline_method,
    "extract_class": _extract_class,
}


def _run(unit: SourceUnit, r: RefactoringInstance, config: Optional[EngineConfig]) -> _Outcome:
    if r.kind not in _HANDLERS:
        raise UnsupportedKind(f"the engine cannot perform {r.kind!r}")
    config = config or EngineConfig()
    handler = _HANDLERS[r.kind]
    if r.kind in RENAME_KINDS:
        return handler(unit, r.kind, r.record, config)
    return handler(unit, r.record, config)


def check(unit: SourceUnit, r: RefactoringInstance, config: Optional[EngineConfig] = None) -> list[PreconditionViolation]:
    """Precondition violations of ``r`` on ``unit``; an empty list means it can be applied."""
    return _run(unit, r, config).violations


def apply(unit: SourceUnit, r: RefactoringInstance, config: Optional[EngineConfig] = None) -> SourceUnit:
    with logfire.span("apply {kind}", kind=r.kind):
        outcome = _run(unit, r, config)
        if outcome.violations:
            raise PreconditionFailed(outcome.violations)
        if outcome.types is unit.types:
            return unit
        result = rebuild(unit, outcome.types)
        logfire.info("applied {label}", label=r.label())
        return result


def inline_layout(unit: SourceUnit, r: RefactoringInstance,
                  config: Optional[EngineConfig] = None) -> tuple[tuple[ClassDecl, ...], list[tuple[int, int, int]]]:
    """Transformed types of an inline_method plus, per call site, (block id, first index, statement count)."""
    outcome = _run(unit, r, config)
    if outcome.violations:
        raise PreconditionFailed(outcome.violations)
    return outcome.types, outcome.builder.notes.get("layout", [])


def invert(r: RefactoringInstance, before: SourceUnit, after: SourceUnit) -> RefactoringInstance:
    """Refactoring that undoes ``r``, expressed against ``after``."""
    if r.kind in RENAME_KINDS:
        p: RenameParams = r.record
        swapped = p.model_copy(update={"old_name": p.new_name, "new_name": p.old_name})
        decl = rename_target(after, r.kind, swapped.model_copy(update={"ordinal": p.ordinal}))
        if isinstance(decl, LocalVarDecl):
            ordinal = local_ordinal(after.enclosing(decl, MethodDecl), decl)
            swapped = swapped.model_copy(update={"ordinal": ordinal})
        return RefactoringInstance.build(r.kind, swapped.model_copy(update={"declaration": LineSpan.of(decl.span)}))
    if r.kind == "extract_variable":
        p = r.record
        method = find_method(after, p.method)
        decl = find_local(method, p.new_name)
        return inline_variable_instance(after, decl)
    if r.kind == "inline_variable":
        return _invert_inline_variable(r.record, before, after)
    if r.kind == "extract_method":
        p = r.record
        cls = find_class(after, _owner_path(p.source_method))
        new_method = next(
            m for m in cls.members if isinstance(m, MethodDecl) and m.name == p.new_name and len(m.params) == len(p.parameters)
        )
        return inline_method_instance(after, new_method)
    if r.kind == "inline_method":
        return _invert_inline_method(r.record, before, after)
    raise NotInvertible(f"{r.kind} has no lossless inverse in this engine")


def _owner_path(method_path_: str) -> str:
    return method_path_.split("(", 1)[0].rsplit(".", 1)[0]


def _invert_inline_variable(p: InlineVariableParams, before: SourceUnit, after: SourceUnit) -> RefactoringInstance:
    method = find_method(before, p.method)
    decl = find_local(method, p.variable, p.ordinal)
    uses = before.refs_to(decl)
    block = before.parent(decl)
    k = _index_of(block.stmts, decl.id)
    if not uses or k + 1 >= len(block.stmts):
        raise NotInvertible(f"{p.variable!r} has no uses to extract again")
    expression = print_expr(decl.init)
    existing = [o for o in expression_occurrences(method, expression) if not decl.span.contains(o.span)]
    events = sorted([(o.span.start_offset, False) for o in existing] + [(u.span.start_offset, True) for u in uses])
    indices = [i for i, (_, is_use) in enumerate(events) if is_use]
    after_method = find_method(after, method_path(before, method))
    after_found = expression_occurrences(after_method, expression)
    outer = _outermost_class(before, block)
    path = child_index_path(outer, block.id)
    # the declaration is gone, so the statement that followed it now sits at its index
    after_block = node_at(after.types[_index_of(before.types, outer.id)], path) if path is not None else None
    insertion = after_block.stmts[k] if isinstance(after_block, Block) and k < len(after_block.stmts) else None
    params = ExtractVariableParams(
        method=method_path(after, after_method),
        expression=expression,
        occurrences=[LineSpan.of(after_found[i].span) for i in indices if i < len(after_found)],
        occurrence_indices=indices,
        new_name=decl.name,
        insertion_point=LineSpan.of(insertion.span if insertion is not None else after_found[indices[0]].span),
        type_text=decl.type_text,
        modifiers=decl.modifiers,
    )
    return RefactoringInstance.build("extract_variable", params)


def _invert_inline_method(p: InlineMethodParams, before: SourceUnit, after: SourceUnit) -> RefactoringInstance:
    method = find_method(before, p.method)
    calls = before.refs_to(method)
    if len(calls) != 1 or not all(isinstance(a, Name) for a in calls[0].args):
        raise NotInvertible("only a single call site with plain variable arguments can be extracted again")
    transformed, layout = inline_layout(before, RefactoringInstance.build("inline_method", p))
    if len(layout) != 1:
        raise NotInvertible("call site was not a block statement")
    block_id, start, count = layout[0]
    for k, cls in enumerate(transformed):
        path = child_index_path(cls, block_id)
        if path is not None:
            block = node_at(after.types[k], path)
            break
    else:
        raise NotInvertible("inlined block not found")
    caller = before.enclosing(calls[0], MethodDecl)
    stmts = block.stmts[start:start + count]
    stmt = _innermost_statement(before, calls[0])
    if not (
        (isinstance(stmt, ExprStmt) and (stmt.expr.id == calls[0].id or (
            isinstance(stmt.expr, Assign) and stmt.expr.value.id == calls[0].id)))
        or (isinstance(stmt, LocalVarDecl) and stmt.init is not None and stmt.init.id == calls[0].id)
    ):
        raise NotInvertible("call site is nested inside another statement")
    return_variable = None
    if isinstance(stmt, LocalVarDecl):
        return_variable = stmt.name
    elif isinstance(stmt, ExprStmt) and isinstance(stmt.expr, Assign):
        return_variable = print_expr(stmt.expr.target)
    cls = before.enclosing(method, ClassDecl)
    index = _index_of(cls.members, method.id)
    params = ExtractMethodParams(
        source_method=method_path(after, after.enclosing(stmts[0], MethodDecl)),
        statements=[LineSpan.of(s.span) for s in stmts],
        new_name=method.name,
        parameters=[prm.name for prm in method.params],
        arguments=[a.name for a in calls[0].args],
        return_variable=return_variable,
        call_site=LineSpan.of(stmts[0].span),
        modifiers=method.modifiers,
        throws=method.throws,
        position=None if index == _index_of(cls.members, caller.id) + 1 else index,
    )
    inverse = RefactoringInstance.build("extract_method", params)
    if check(after, inverse):
        raise NotInvertible("inlined statements cannot be extracted back into the same method")
    return inverse


# ---- instance builders ----


def rename_instance(unit: SourceUnit, decl: Node, new_name: str) -> RefactoringInstance:
    """Rename record for any declaration in ``unit``."""
    if isinstance(decl, FieldDecl):
        kind, entity, extra = "rename_attribute", class_path(unit, unit.enclosing(decl, ClassDecl)), {}
    elif isinstance(decl, MethodDecl):
        kind = "rename_method"
        entity = class_path(unit, unit.enclosing(decl, ClassDecl))
        extra = {"param_types": [t.replace(" ", "") for t in decl.param_types]}
    elif isinstance(decl, ParamDecl):
        kind, entity, extra = "rename_parameter", method_path(unit, unit.enclosing(decl, MethodDecl)), {}
    elif isinstance(decl, LocalVarDecl):
        method = unit.enclosing(decl, MethodDecl)
        kind, entity, extra = "rename_variable", method_path(unit, method), {"ordinal": local_ordinal(method, decl)}
    else:
        raise UnknownEntity(f"{decl.kind} cannot be renamed")
    params = RenameParams(entity=entity, old_name=decl.name, new_name=new_name,
                          declaration=LineSpan.of(decl.span), **extra)
    return RefactoringInstance.build(kind, params)


def inline_variable_instance(unit: SourceUnit, decl: LocalVarDecl) -> RefactoringInstance:
    method = unit.enclosing(decl, MethodDecl)
    params = InlineVariableParams(
        method=method_path(unit, method),
        variable=decl.name,
        declaration=LineSpan.of(decl.span),
        uses=[LineSpan.of(u.span) for u in unit.refs_to(decl)],
        ordinal=local_ordinal(method, decl),
    )
    return RefactoringInstance.build("inline_variable", params)


def inline_method_instance(unit: SourceUnit, method: MethodDecl) -> RefactoringInstance:
    params = InlineMethodParams(method=method_path(unit, method),
                                call_sites=[LineSpan.of(c.span) for c in unit.refs_to(method)])
    return RefactoringInstance.build("inline_method", params)


def extract_variable_instance(unit: SourceUnit, method: MethodDecl, occurrences: list[Expr], new_name: str,
                              type_text: str = "var", modifiers: str = "",
                              insertion: Optional[Stmt] = None) -> RefactoringInstance:
    """Extract-variable record for the given occurrences; the insertion point defaults to the innermost one."""
    expression = print_expr(occurrences[0])
    found = expression_occurrences(method, expression)
    ids = [f.id for f in found]
    indices = sorted(ids.index(o.id) for o in occurrences)
    candidates = insertion_candidates(unit, [found[k] for k in indices])
    anchor = insertion or (candidates[0].stmt if candidates else occurrences[0])
    params = ExtractVariableParams(
        method=method_path(unit, method),
        expression=expression,
        occurrences=[LineSpan.of(found[k].span) for k in indices],
        occurrence_indices=indices,
        new_name=new_name,
        insertion_point=LineSpan.of(anchor.span),
        type_text=type_text,
        modifiers=modifiers,
    )
    return RefactoringInstance.build("extract_variable", params)


def extract_method_instance(unit: SourceUnit, method: MethodDecl, block: Block, start: int, end: int,
                            new_name: str) -> RefactoringInstance:
    """Extract-method record for ``block.stmts[start:end]`` with the engine defaults."""
    info = analyze_range(unit, method, block, start, end)
    names = [d.name for d in info.inputs]
    modifiers = "private static" if "static" in method.modifiers.split() else "private"
    params = ExtractMethodParams(
        source_method=method_path(unit, method),
        statements=[LineSpan.of(s.span) for s in info.region],
        new_name=new_name,
        parameters=names,
        arguments=names,
        return_variable=info.live_out[0].name if len(info.live_out) == 1 else None,
        call_site=LineSpan.of(info.region[0].span),
        modifiers=modifiers,
        throws=method.throws,
    )
    return RefactoringInstance.build("extract_method", params)