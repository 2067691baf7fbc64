"""Canonical printer. Output reparses to a structurally identical tree."""
from __future__ import annotations

from typing import Optional

from .ast_nodes import (
    ArrayAccess,
    Assign,
    Binary,
    Block,
    Break,
    Cast,
    ClassDecl,
    Continue,
    Expr,
    ExprStmt,
    FieldAccess,
    FieldDecl,
    For,
    ForEach,
    If,
    Initializer,
    InstanceOf,
    Literal,
    LocalVarDecl,
    Member,
    MethodCall,
    MethodDecl,
    Name,
    New,
    OpaqueExpr,
    OpaqueMember,
    OpaqueStmt,
    ParamDecl,
    Return,
    Stmt,
    Ternary,
    Throw,
    Try,
    Unary,
    While,
)
from .lexer import PRIMITIVE_TYPES
from .parser import BINARY_PRECEDENCE

INDENT = "    "
_PRIMARY = 15
_PREFIX = 13


def precedence(expr: Expr) -> int:
    if isinstance(expr, Assign):
        return 1
    if isinstance(expr, Ternary):
        return 2
    if isinstance(expr, Binary):
        return BINARY_PRECEDENCE[expr.op]
    if isinstance(expr, InstanceOf):
        return BINARY_PRECEDENCE["instanceof"]
    if isinstance(expr, Cast):
        return _PREFIX
    if isinstance(expr, Unary):
        return 14 if expr.postfix else _PREFIX
    if isinstance(expr, OpaqueExpr):
        text = expr.text
        if text.startswith("new ") or ("::" in text and " " not in text):
            return _PRIMARY
        return 0
    return _PRIMARY


def _wrap(expr: Expr, min_prec: int) -> str:
    text = print_expr(expr)
    return f"({text})" if precedence(expr) < min_prec else text


def _args(args: tuple[Expr, ...]) -> str:
    return ", ".join(print_expr(a) for a in args)


def print_expr(expr: Expr) -> str:
    if isinstance(expr, Literal):
        return expr.text
    if isinstance(expr, Name):
        return expr.name
    if isinstance(expr, OpaqueExpr):
        return expr.text
    if isinstance(expr, FieldAccess):
        return f"{_wrap(expr.target, _PRIMARY)}.{expr.name}"
    if isinstance(expr, MethodCall):
        call = f"{expr.name}({_args(expr.args)})"
        return call if expr.target is None else f"{_wrap(expr.target, _PRIMARY)}.{call}"
    if isinstance(expr, ArrayAccess):
        return f"{_wrap(expr.target, _PRIMARY)}[{print_expr(expr.index)}]"
    if isinstance(expr, New):
        return f"new {expr.type_text}({_args(expr.args)})"
    if isinstance(expr, Unary):
        if expr.postfix:
            return _wrap(expr.operand, 14) + expr.op
        operand = _wrap(expr.operand, _PREFIX)
        if isinstance(expr.operand, (Unary, Cast)) and not operand.startswith("("):
            operand = f"({operand})"
        return expr.op + operand
    if isinstance(expr, Cast):
        operand = _wrap(expr.expr, _PREFIX)
        base = expr.type_text.split("[")[0]
        if base not in PRIMITIVE_TYPES and operand[:1] in ("+", "-"):
            operand = f"({operand})"
        return f"({expr.type_text}) {operand}"
    if isinstance(expr, Binary):
        prec = BINARY_PRECEDENCE[expr.op]
        return f"{_wrap(expr.left, prec)} {expr.op} {_wrap(expr.right, prec + 1)}"
    if isinstance(expr, InstanceOf):
        return f"{_wrap(expr.expr, BINARY_PRECEDENCE['instanceof'])} instanceof {expr.type_text}"
    if isinstance(expr, Assign):
        return f"{_wrap(expr.target, 2)} {expr.op} {_wrap(expr.value, 1)}"
    if isinstance(expr, Ternary):
        return f"{_wrap(expr.cond, 3)} ? {_wrap(expr.then, 0)} : {_wrap(expr.otherwise, 2)}"
    raise TypeError(f"cannot print {type(expr).__name__}")


def _prefixed(modifiers: str, rest: str) -> str:
    return f"{modifiers} {rest}" if modifiers else rest


def _declarator(decl: LocalVarDecl) -> str:
    text = _prefixed(decl.modifiers, f"{decl.type_text} {decl.name}")
    if decl.init is not None:
        text += f" = {print_expr(decl.init)}"
    return text


def _for_init(init: tuple[Stmt, ...]) -> str:
    parts: list[str] = []
    for k, stmt in enumerate(init):
        if isinstance(stmt, LocalVarDecl):
            if k == 0:
                parts.append(_declarator(stmt))
            else:
                parts.append(stmt.name + ("" if stmt.init is None else f" = {print_expr(stmt.init)}"))
        else:
            parts.append(print_expr(stmt.expr))
    return ", ".join(parts)


def _block_body(block: Block, depth: int) -> list[str]:
    lines: list[str] = []
    for stmt in block.stmts:
        lines.extend(stmt_lines(stmt, depth))
    return lines


def _attach(prefix: str, body: Stmt, depth: int) -> list[str]:
    if isinstance(body, Block):
        return [prefix + " {", *_block_body(body, depth + 1), INDENT * depth + "}"]
    return [prefix, *stmt_lines(body, depth + 1)]


def stmt_lines(stmt: Stmt, depth: int = 0) -> list[str]:
    ind = INDENT * depth
    if isinstance(stmt, Block):
        return [ind + "{", *_block_body(stmt, depth + 1), ind + "}"]
    if isinstance(stmt, LocalVarDecl):
        return [ind + _declarator(stmt) + ";"]
    if isinstance(stmt, ExprStmt):
        return [ind + print_expr(stmt.expr) + ";"]
    if isinstance(stmt, If):
        lines = _attach(f"{ind}if ({print_expr(stmt.cond)})", stmt.then, depth)
        if stmt.otherwise is not None:
            prefix = lines.pop() + " else" if isinstance(stmt.then, Block) else ind + "else"
            if isinstance(stmt.otherwise, If):
                chained = stmt_lines(stmt.otherwise, depth)
                lines.append(prefix + " " + chained[0].lstrip())
                lines.extend(chained[1:])
            else:
                lines.extend(_attach(prefix, stmt.otherwise, depth))
        return lines
    if isinstance(stmt, While):
        return _attach(f"{ind}while ({print_expr(stmt.cond)})", stmt.body, depth)
    if isinstance(stmt, For):
        cond = "" if stmt.cond is None else " " + print_expr(stmt.cond)
        update = ", ".join(print_expr(u) for u in stmt.update)
        update = " " + update if update else ""
        return _attach(f"{ind}for ({_for_init(stmt.init)};{cond};{update})", stmt.body, depth)
    if isinstance(stmt, ForEach):
        header = f"{ind}for ({_declarator(stmt.var)} : {print_expr(stmt.iterable)})"
        return _attach(header, stmt.body, depth)
    if isinstance(stmt, Return):
        return [ind + ("return;" if stmt.value is None else f"return {print_expr(stmt.value)};")]
    if isinstance(stmt, Throw):
        return [ind + f"throw {print_expr(stmt.value)};"]
    if isinstance(stmt, (Break, Continue)):
        word = "break" if isinstance(stmt, Break) else "continue"
        return [ind + (f"{word} {stmt.label};" if stmt.label else f"{word};")]
    if isinstance(stmt, Try):
        header = ind + "try"
        if stmt.resources:
            resources = "; ".join(
                _declarator(r) if isinstance(r, LocalVarDecl) else print_expr(r) for r in stmt.resources
            )
            header += f" ({resources})"
        lines = _attach(header, stmt.body, depth)
        for catch in stmt.catches:
            prefix = lines.pop() + f" catch ({print_param(catch.param)})"
            lines.extend(_attach(prefix, catch.body, depth))
        if stmt.finally_ is not None:
            lines.extend(_attach(lines.pop() + " finally", stmt.finally_, depth))
        return lines
    if isinstance(stmt, OpaqueStmt):
        return [ind + stmt.text]
    raise TypeError(f"cannot print {type(stmt).__name__}")


def print_stmt(stmt: Stmt, depth: int = 0) -> str:
    return "\n".join(stmt_lines(stmt, depth))


def print_param(param: ParamDecl) -> str:
    return _prefixed(param.modifiers, f"{param.type_text} {param.name}")


def method_header(method: MethodDecl) -> str:
    parts = [method.modifiers, method.type_params]
    if method.return_type is not None:
        parts.append(method.return_type)
    head = " ".join(p for p in parts if p)
    signature = f"{method.name}({', '.join(print_param(p) for p in method.params)})"
    text = f"{head} {signature}" if head else signature
    if method.throws:
        text += f" throws {method.throws}"
    return text


def member_lines(member: Member, depth: int = 0) -> list[str]:
    ind = INDENT * depth
    if isinstance(member, FieldDecl):
        text = _prefixed(member.modifiers, f"{member.type_text} {member.name}")
        if member.init is not None:
            text += f" = {print_expr(member.init)}"
        return [ind + text + ";"]
    if isinstance(member, MethodDecl):
        header = ind + method_header(member)
        if member.body is None:
            return [header + ";"]
        return _attach(header, member.body, depth)
    if isinstance(member, Initializer):
        if member.modifiers:
            return _attach(ind + member.modifiers, member.body, depth)
        return [ind + "{", *_block_body(member.body, depth + 1), ind + "}"]
    if isinstance(member, ClassDecl):
        return class_lines(member, depth)
    if isinstance(member, OpaqueMember):
        return [ind + member.text]
    raise TypeError(f"cannot print {type(member).__name__}")


def class_lines(cls: ClassDecl, depth: int = 0) -> list[str]:
    ind = INDENT * depth
    head = _prefixed(cls.modifiers, f"{cls.keyword} {cls.name}")
    if cls.header:
        head += cls.header if cls.header[0] in "<(" else " " + cls.header
    lines = [ind + head + " {"]
    previous: Optional[Member] = None
    for member in cls.members:
        if previous is not None and not (isinstance(previous, FieldDecl) and isinstance(member, FieldDecl)):
            lines.append("")
        lines.extend(member_lines(member, depth + 1))
        previous = member
    lines.append(ind + "}")
    return lines


def print_document(package_header: str, imports: tuple[str, ...], types: tuple[ClassDecl, ...]) -> str:
    lines: list[str] = []
    if package_header:
        lines += [package_header, ""]
    if imports:
        lines += [*imports, ""]
    for k, cls in enumerate(types):
        if k:
            lines.append("")
        lines.extend(class_lines(cls))
    return "\n".join(lines) + "\n"
