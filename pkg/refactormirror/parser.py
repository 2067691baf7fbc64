"""Hand-written recursive-descent parser for the Java-subset dialect.

Constructs outside the subset are not rejected: expressions, statements and
members the parser does not model are captured verbatim as opaque nodes, as
long as brackets balance. Only lexical errors and unbalanced structure raise
``SourceSyntaxError``.
"""
from __future__ import annotations

from bisect import bisect_right
from typing import Optional

from .ast_nodes import (
    ArrayAccess,
    Assign,
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
    Span,
    Stmt,
    Ternary,
    Throw,
    Try,
    Unary,
    While,
)
from .errors import SourceSyntaxError
from .lexer import KEYWORDS, PRIMITIVE_TYPES, Token, tokenize

MODIFIER_WORDS = frozenset(
    {"public", "protected", "private", "static", "final", "abstract", "native",
     "synchronized", "transient", "volatile", "strictfp", "default", "sealed"}
)

BINARY_PRECEDENCE = {
    "||": 3, "&&": 4, "|": 5, "^": 6, "&": 7,
    "==": 8, "!=": 8,
    "<": 9, ">": 9, "<=": 9, ">=": 9, "instanceof": 9,
    "<<": 10, ">>": 10, ">>>": 10,
    "+": 11, "-": 11,
    "*": 12, "/": 12, "%": 12,
}
ASSIGN_OPS = frozenset({"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="})
PREFIX_OPS = frozenset({"+", "-", "!", "~", "++", "--"})
_LITERAL_WORDS = frozenset({"true", "false", "null", "this", "super"})
_TYPE_ARG_WORDS = frozenset({"extends", "super"})
_CLASS_WORDS = ("class", "interface", "enum")


class ParsedDocument:
    def __init__(self, package_header: str, imports: tuple[str, ...], types: tuple[ClassDecl, ...]):
        self.package_header = package_header
        self.imports = imports
        self.types = types


class Parser:
    def __init__(self, source: str):
        self.source = source
        self.tokens: list[Token] = tokenize(source)
        self.i = 0
        self.next_id = 0
        self._line_starts = [0] + [k + 1 for k, ch in enumerate(source) if ch == "\n"]

    # ---- token helpers ----

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def advance(self, n: int = 1) -> Token:
        tok = self.tok
        self.i = min(self.i + n, len(self.tokens) - 1)
        return tok

    def _line(self, offset: int) -> int:
        return bisect_right(self._line_starts, offset)

    def _span(self, start: int, end: int) -> Span:
        return Span(start, end, self._line(start), self._line(max(start, end - 1)))

    def fail(self, message: str) -> SourceSyntaxError:
        tok = self.tok
        return SourceSyntaxError(self._span(tok.start, tok.end), f"{message}, found {tok.text or 'end of input'!r}")

    def expect_op(self, text: str) -> Token:
        if not self.tok.is_op(text):
            raise self.fail(f"expected {text!r}")
        return self.advance()

    def expect_word(self, text: str) -> Token:
        if not self.tok.is_word(text):
            raise self.fail(f"expected {text!r}")
        return self.advance()

    def expect_ident(self) -> str:
        tok = self.tok
        if tok.kind != "ident" or tok.text in KEYWORDS and tok.text not in ("var", "record", "yield"):
            raise self.fail("expected identifier")
        self.advance()
        return tok.text

    @property
    def prev_end(self) -> int:
        return self.tokens[self.i - 1].end if self.i > 0 else 0

    def _node(self, cls, start: int, *args, **kwargs):
        self.next_id += 1
        return cls(*args, span=self._span(start, self.prev_end), id=self.next_id, **kwargs)

    def _slice(self, start: int) -> str:
        return self.source[start:self.prev_end].strip()

    def _skip_balanced(self) -> None:
        opener = self.tok
        if not opener.is_op("(", "[", "{"):
            raise self.fail("expected bracket")
        depth = 0
        while True:
            tok = self.advance()
            if tok.kind == "eof":
                raise self.fail("unbalanced brackets")
            if tok.is_op("(", "[", "{"):
                depth += 1
            elif tok.is_op(")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return

    def _skip_to_semicolon(self) -> None:
        while not self.tok.is_op(";"):
            if self.tok.kind == "eof" or self.tok.is_op(")", "]", "}"):
                raise self.fail("expected ';'")
            if self.tok.is_op("(", "[", "{"):
                self._skip_balanced()
            else:
                self.advance()
        self.advance()

    @staticmethod
    def _join(tokens: list[Token]) -> str:
        out: list[str] = []
        prev: Optional[Token] = None
        for tok in tokens:
            if prev is not None:
                wordish_prev = prev.kind != "op" or prev.text in ("?", ">", ")", "]")
                if prev.text == ",":
                    out.append(" ")
                elif tok.text == "&" or prev.text == "&":
                    out.append(" ")
                elif wordish_prev and tok.kind != "op":
                    out.append(" ")
                elif tok.text == "|" or prev.text == "|":
                    out.append(" ")
            out.append(tok.text)
            prev = tok
        return "".join(out)

    # ---- compilation unit ----

    def parse_document(self) -> ParsedDocument:
        package_header = ""
        imports: list[str] = []
        types: list[ClassDecl] = []
        if self.tok.is_word("package"):
            start = self.tok.start
            self._skip_to_semicolon()
            package_header = " ".join(self._slice(start).split())
        while self.tok.is_word("import"):
            start = self.tok.start
            self._skip_to_semicolon()
            imports.append(" ".join(self._slice(start).split()))
        while self.tok.kind != "eof":
            if self.tok.is_op(";"):
                self.advance()
                continue
            start = self.tok.start
            modifiers = self.parse_modifiers()
            if not (self.tok.kind == "ident" and self.tok.text in _CLASS_WORDS + ("record",)):
                raise self.fail("expected class declaration")
            types.append(self.parse_class_decl(start, modifiers))
        return ParsedDocument(package_header, tuple(imports), tuple(types))

    def parse_modifiers(self) -> str:
        parts: list[str] = []
        while True:
            tok = self.tok
            if tok.is_op("@") and not self.peek().is_word("interface"):
                start = tok.start
                self.advance()
                self.expect_ident()
                while self.tok.is_op(".") and self.peek().kind == "ident":
                    self.advance(2)
                if self.tok.is_op("("):
                    self._skip_balanced()
                parts.append(" ".join(self._slice(start).split()))
            elif tok.kind == "ident" and tok.text in MODIFIER_WORDS:
                if tok.text == "synchronized" and self.peek().is_op("("):
                    break
                if tok.text == "default" and self.peek().is_op(":"):
                    break
                parts.append(tok.text)
                self.advance()
            else:
                break
        return " ".join(parts)

    def parse_class_decl(self, start: int, modifiers: str) -> ClassDecl:
        keyword = self.advance().text
        name = self.expect_ident()
        header_tokens: list[Token] = []
        while not self.tok.is_op("{"):
            if self.tok.kind == "eof" or self.tok.is_op(";", "}"):
                raise self.fail("expected class body")
            header_tokens.append(self.advance())
        self.expect_op("{")
        members = self.parse_class_body(keyword == "enum")
        self.expect_op("}")
        return self._node(ClassDecl, start, modifiers, keyword, name, self._join(header_tokens), tuple(members))

    def parse_class_body(self, is_enum: bool) -> list[Member]:
        members: list[Member] = []
        if is_enum and not self.tok.is_op("}"):
            start = self.tok.start
            while not self.tok.is_op(";", "}"):
                if self.tok.kind == "eof":
                    raise self.fail("unterminated enum")
                if self.tok.is_op("(", "[", "{"):
                    self._skip_balanced()
                else:
                    self.advance()
            if self.tok.is_op(";"):
                self.advance()
            if self.prev_end > start:
                members.append(self._node(OpaqueMember, start, self._slice(start)))
        while not self.tok.is_op("}"):
            if self.tok.kind == "eof":
                raise self.fail("expected '}'")
            if self.tok.is_op(";"):
                self.advance()
                continue
            save = self.i
            try:
                members.extend(self.parse_member())
            except SourceSyntaxError:
                self.i = save
                members.append(self._opaque_member())
        return members

    def _opaque_member(self) -> OpaqueMember:
        start = self.tok.start
        while True:
            tok = self.tok
            if tok.kind == "eof" or tok.is_op("}"):
                raise self.fail("unterminated member")
            if tok.is_op(";"):
                self.advance()
                break
            if tok.is_op("{"):
                self._skip_balanced()
                if self.tok.is_op(";"):
                    self.advance()
                break
            if tok.is_op("(", "["):
                self._skip_balanced()
            else:
                self.advance()
        return self._node(OpaqueMember, start, self._slice(start))

    def parse_member(self) -> list[Member]:
        start = self.tok.start
        if self.tok.is_op("{"):
            return [self._node(Initializer, start, "", self.parse_block())]
        if self.tok.is_word("static") and self.peek().is_op("{"):
            self.advance()
            return [self._node(Initializer, start, "static", self.parse_block())]
        modifiers = self.parse_modifiers()
        tok = self.tok
        if tok.kind == "ident" and tok.text in _CLASS_WORDS:
            return [self.parse_class_decl(start, modifiers)]
        if tok.is_word("record") and self.peek().kind == "ident":
            return [self.parse_class_decl(start, modifiers)]
        if tok.is_op("@"):
            raise self.fail("annotation type declarations are not modelled")
        type_params = ""
        if tok.is_op("<"):
            type_params = self.parse_type_args()
        if self.tok.kind == "ident" and self.peek().is_op("("):
            name = self.expect_ident()
            params = self.parse_params()
            throws = self.parse_throws()
            body = self.parse_block()
            return [self._node(MethodDecl, start, modifiers, type_params, None, name, params, throws, body)]
        type_text = self.parse_type()
        name = self.expect_ident()
        if self.tok.is_op("("):
            params = self.parse_params()
            while self.tok.is_op("[") and self.peek().is_op("]"):
                self.advance(2)
                type_text += "[]"
            throws = self.parse_throws()
            body: Optional[Block] = None
            if self.tok.is_op(";"):
                self.advance()
            else:
                body = self.parse_block()
            return [self._node(MethodDecl, start, modifiers, type_params, type_text, name, params, throws, body)]
        if type_params:
            raise self.fail("expected method")
        fields: list[FieldDecl] = []
        while True:
            declared_type = type_text
            while self.tok.is_op("[") and self.peek().is_op("]"):
                self.advance(2)
                declared_type += "[]"
            init = None
            if self.tok.is_op("="):
                self.advance()
                init = self.parse_initializer()
            fields.append(self._node(FieldDecl, start, modifiers, declared_type, name, init))
            if self.tok.is_op(","):
                self.advance()
                name = self.expect_ident()
                continue
            self.expect_op(";")
            return fields

    def parse_params(self) -> tuple[ParamDecl, ...]:
        self.expect_op("(")
        params: list[ParamDecl] = []
        while not self.tok.is_op(")"):
            start = self.tok.start
            modifiers = self.parse_modifiers()
            type_text = self.parse_type()
            name = self.expect_ident()
            while self.tok.is_op("[") and self.peek().is_op("]"):
                self.advance(2)
                type_text += "[]"
            params.append(self._node(ParamDecl, start, modifiers, type_text, name))
            if not self.tok.is_op(")"):
                self.expect_op(",")
        self.advance()
        return tuple(params)

    def parse_throws(self) -> str:
        if not self.tok.is_word("throws"):
            return ""
        self.advance()
        tokens: list[Token] = []
        while not self.tok.is_op("{", ";"):
            if self.tok.kind == "eof":
                raise self.fail("expected method body")
            tokens.append(self.advance())
        return self._join(tokens)

    # ---- types ----

    def parse_type_args(self) -> str:
        tokens = [self.expect_op("<")]
        depth = 1
        while depth:
            tok = self.tok
            if tok.is_op("<"):
                depth += 1
            elif tok.is_op(">"):
                depth -= 1
            elif not (tok.kind == "ident" and (tok.text not in KEYWORDS or tok.text in _TYPE_ARG_WORDS | PRIMITIVE_TYPES)
                      or tok.is_op("?", ",", ".", "[", "]", "&", "@")):
                raise self.fail("malformed type arguments")
            tokens.append(self.advance())
        return self._join(tokens)

    def parse_type(self, allow_dims: bool = True) -> str:
        tok = self.tok
        if tok.kind != "ident" or (tok.text in KEYWORDS and tok.text not in PRIMITIVE_TYPES and tok.text != "var"):
            raise self.fail("expected type")
        parts = [self.advance().text]
        while True:
            if self.tok.is_op("<"):
                parts.append(self.parse_type_args())
            elif self.tok.is_op(".") and self.peek().kind == "ident" and self.peek().text not in KEYWORDS:
                self.advance()
                parts.append("." + self.advance().text)
            else:
                break
        if allow_dims:
            while self.tok.is_op("[") and self.peek().is_op("]"):
                self.advance(2)
                parts.append("[]")
            if self.tok.is_op("..."):
                self.advance()
                parts.append("...")
        return "".join(parts)

    # ---- statements ----

    def parse_block(self) -> Block:
        start = self.expect_op("{").start
        stmts: list[Stmt] = []
        while not self.tok.is_op("}"):
            if self.tok.kind == "eof":
                raise self.fail("expected '}'")
            stmts.extend(self.parse_block_statement())
        self.advance()
        return self._node(Block, start, tuple(stmts))

    def parse_statement(self) -> Stmt:
        stmts = self.parse_block_statement()
        if len(stmts) != 1:
            raise self.fail("declaration not allowed here")
        return stmts[0]

    def parse_block_statement(self) -> list[Stmt]:
        tok = self.tok
        start = tok.start
        if tok.is_op("{"):
            return [self.parse_block()]
        if tok.is_op(";"):
            self.advance()
            return [self._node(OpaqueStmt, start, ";")]
        if tok.kind == "ident":
            word = tok.text
            if word == "if":
                return [self._parse_if(start)]
            if word == "while":
                self.advance()
                cond = self._paren_condition()
                body = self.parse_statement()
                return [self._node(While, start, cond, body)]
            if word == "for":
                return [self._parse_for(start)]
            if word == "return":
                self.advance()
                value = None if self.tok.is_op(";") else self.expression_until(";")
                self.expect_op(";")
                return [self._node(Return, start, value)]
            if word == "throw":
                self.advance()
                value = self.expression_until(";")
                self.expect_op(";")
                return [self._node(Throw, start, value)]
            if word in ("break", "continue"):
                self.advance()
                label = self.expect_ident() if self.tok.kind == "ident" else ""
                self.expect_op(";")
                return [self._node(Break if word == "break" else Continue, start, label)]
            if word == "try":
                return [self._parse_try(start)]
            if word in ("switch", "do", "synchronized", "assert", "yield") and not self.peek().is_op("=", "."):
                return [self._opaque_statement(start)]
            if word in _CLASS_WORDS or (word in MODIFIER_WORDS and word != "final"):
                return [self._opaque_statement(start)]
            if self.peek().is_op(":") and word not in KEYWORDS:
                return [self._opaque_statement(start)]
        decls = self._try_local_var_decls(start)
        if decls is not None:
            return decls
        expr = self.expression_until(";")
        self.expect_op(";")
        return [self._node(ExprStmt, start, expr)]

    def _opaque_statement(self, start: int) -> OpaqueStmt:
        word = self.tok.text
        if word == "switch":
            self.advance()
            self._skip_balanced()
            self._skip_balanced()
            if self.tok.is_op(";"):
                self.advance()
        elif word == "synchronized":
            self.advance()
            self._skip_balanced()
            self.parse_block()
        elif word == "do":
            self.advance()
            self.parse_statement()
            self.expect_word("while")
            self._skip_balanced()
            self.expect_op(";")
        elif word in ("assert", "yield"):
            self._skip_to_semicolon()
        elif self.peek().is_op(":"):
            self.advance(2)
            self.parse_statement()
        else:
            modifiers = self.parse_modifiers()
            if not (self.tok.kind == "ident" and self.tok.text in _CLASS_WORDS):
                raise self.fail("unsupported statement")
            self.parse_class_decl(start, modifiers)
        return self._node(OpaqueStmt, start, self._slice(start))

    def _paren_condition(self) -> Expr:
        self.expect_op("(")
        cond = self.expression_until(")")
        self.expect_op(")")
        return cond

    def _parse_if(self, start: int) -> If:
        self.advance()
        cond = self._paren_condition()
        then = self.parse_statement()
        otherwise = None
        if self.tok.is_word("else"):
            self.advance()
            otherwise = self.parse_statement()
        return self._node(If, start, cond, then, otherwise)

    def _parse_for(self, start: int) -> Stmt:
        self.advance()
        self.expect_op("(")
        save = self.i
        try:
            var_start = self.tok.start
            modifiers = self.parse_modifiers()
            type_text = self.parse_type()
            name = self.expect_ident()
            self.expect_op(":")
            var = self._node(LocalVarDecl, var_start, modifiers, type_text, name, None)
            iterable = self.expression_until(")")
            self.expect_op(")")
            body = self.parse_statement()
            return self._node(ForEach, start, var, iterable, body)
        except SourceSyntaxError:
            self.i = save
        init: list[Stmt] = []
        if not self.tok.is_op(";"):
            decls = self._try_local_var_decls(self.tok.start, terminator=";")
            if decls is not None:
                init.extend(decls)
            else:
                while True:
                    expr_start = self.tok.start
                    expr = self.expression_until(",", ";")
                    init.append(self._node(ExprStmt, expr_start, expr))
                    if not self.tok.is_op(","):
                        break
                    self.advance()
        self.expect_op(";")
        cond = None if self.tok.is_op(";") else self.expression_until(";")
        self.expect_op(";")
        update: list[Expr] = []
        while not self.tok.is_op(")"):
            update.append(self.expression_until(",", ")"))
            if self.tok.is_op(","):
                self.advance()
        self.expect_op(")")
        body = self.parse_statement()
        return self._node(For, start, tuple(init), cond, tuple(update), body)

    def _parse_try(self, start: int) -> Try:
        self.advance()
        resources: list = []
        if self.tok.is_op("("):
            self.advance()
            while not self.tok.is_op(")"):
                res_start = self.tok.start
                decls = self._try_local_var_decls(res_start, terminator=None)
                if decls is not None:
                    resources.extend(decls)
                else:
                    resources.append(self.expression_until(";", ")"))
                if self.tok.is_op(";"):
                    self.advance()
            self.advance()
        body = self.parse_block()
        catches: list[Catch] = []
        while self.tok.is_word("catch"):
            catch_start = self.tok.start
            self.advance()
            self.expect_op("(")
            param_start = self.tok.start
            modifiers = self.parse_modifiers()
            types = [self.parse_type()]
            while self.tok.is_op("|"):
                self.advance()
                types.append(self.parse_type())
            name = self.expect_ident()
            param = self._node(ParamDecl, param_start, modifiers, " | ".join(types), name)
            self.expect_op(")")
            catch_body = self.parse_block()
            catches.append(self._node(Catch, catch_start, param, catch_body))
        finally_ = None
        if self.tok.is_word("finally"):
            self.advance()
            finally_ = self.parse_block()
        if not catches and finally_ is None and not resources:
            raise self.fail("expected 'catch' or 'finally'")
        return self._node(Try, start, tuple(resources), body, tuple(catches), finally_)

    def _try_local_var_decls(self, start: int, terminator: Optional[str] = ";") -> Optional[list[Stmt]]:
        """Speculatively parse ``[mods] Type name [= init] {, name [= init]}``; None if it is not one."""
        save = self.i
        try:
            modifiers = self.parse_modifiers()
            type_text = self.parse_type()
            if not (self.tok.kind == "ident" and self.tok.text not in KEYWORDS
                    and self.peek().is_op("=", ";", ",", "[", ")")):
                raise self.fail("not a declaration")
        except SourceSyntaxError:
            self.i = save
            return None
        decls: list[Stmt] = []
        while True:
            name = self.expect_ident()
            declared_type = type_text
            while self.tok.is_op("[") and self.peek().is_op("]"):
                self.advance(2)
                declared_type += "[]"
            init = None
            if self.tok.is_op("="):
                self.advance()
                init = self.parse_initializer()
            decls.append(self._node(LocalVarDecl, start, modifiers, declared_type, name, init))
            if terminator is None or not self.tok.is_op(","):
                break
            self.advance()
        if terminator == ";" and not self._in_for_header():
            self.expect_op(";")
        return decls

    def _in_for_header(self) -> bool:
        # a for-init declaration leaves the ';' to the for parser
        k = self.i - 1
        depth = 0
        while k >= 0:
            tok = self.tokens[k]
            if tok.is_op(")"):
                depth += 1
            elif tok.is_op("("):
                if depth == 0:
                    return k > 0 and self.tokens[k - 1].is_word("for")
                depth -= 1
            elif tok.is_op("{", "}", ";") and depth == 0:
                return False
            k -= 1
        return False

    def parse_initializer(self) -> Expr:
        if self.tok.is_op("{"):
            start = self.tok.start
            self._skip_balanced()
            return self._node(OpaqueExpr, start, self._slice(start))
        return self.expression_until(",", ";", ")")

    # ---- expressions ----

    def expression_until(self, *terminators: str) -> Expr:
        """Parse an expression ending before one of ``terminators``; fall back to an opaque node."""
        save = self.i
        start = self.tok.start
        try:
            expr = self.parse_expression()
            if self.tok.is_op(*terminators):
                return expr
        except SourceSyntaxError:
            pass
        self.i = save
        depth = 0
        while True:
            tok = self.tok
            if tok.kind == "eof":
                raise self.fail("unterminated expression")
            if depth == 0 and tok.is_op(*terminators):
                break
            if tok.is_op("(", "[", "{"):
                depth += 1
            elif tok.is_op(")", "]", "}"):
                if depth == 0:
                    raise self.fail("unexpected closing bracket")
                depth -= 1
            self.advance()
        if self.i == save:
            raise self.fail("expected expression")
        return self._node(OpaqueExpr, start, self._slice(start))

    def parse_expression(self) -> Expr:
        if self._at_lambda():
            return self._parse_lambda()
        start = self.tok.start
        left = self._parse_ternary()
        op, width = self._peek_operator()
        if op in ASSIGN_OPS:
            self.advance(width)
            value = self.parse_expression()
            return self._node(Assign, start, op, left, value)
        return left

    def _peek_operator(self) -> tuple[str, int]:
        tok = self.tok
        if tok.is_word("instanceof"):
            return "instanceof", 1
        if tok.kind != "op":
            return "", 0
        if tok.text != ">":
            return tok.text, 1
        text, width, end = ">", 1, tok.end
        while width < 3:
            nxt = self.peek(width)
            if nxt.start != end or not nxt.is_op(">", ">="):
                break
            text += nxt.text
            width += 1
            end = nxt.end
            if nxt.text == ">=":
                break
        if text not in (">", ">>", ">>>", ">=", ">>=", ">>>="):
            return ">", 1
        return text, width

    def _parse_ternary(self) -> Expr:
        start = self.tok.start
        cond = self._parse_binary(3)
        if not self.tok.is_op("?"):
            return cond
        self.advance()
        then = self.parse_expression()
        self.expect_op(":")
        otherwise = self._parse_lambda() if self._at_lambda() else self._parse_ternary()
        return self._node(Ternary, start, cond, then, otherwise)

    def _parse_binary(self, min_prec: int) -> Expr:
        start = self.tok.start
        left = self._parse_unary()
        while True:
            op, width = self._peek_operator()
            prec = BINARY_PRECEDENCE.get(op)
            if prec is None or prec < min_prec:
                return left
            self.advance(width)
            if op == "instanceof":
                modifiers = self.parse_modifiers()
                type_text = self.parse_type()
                if modifiers or self.tok.kind == "ident" and self.tok.text not in KEYWORDS:
                    raise self.fail("instanceof patterns are not modelled")
                left = self._node(InstanceOf, start, left, type_text)
            else:
                right = self._parse_binary(prec + 1)
                left = self._node(Binary, start, op, left, right)

    def _parse_unary(self) -> Expr:
        tok = self.tok
        start = tok.start
        if tok.kind == "op" and tok.text in PREFIX_OPS:
            self.advance()
            operand = self._parse_unary()
            return self._node(Unary, start, tok.text, operand, False)
        if tok.is_op("(") and self._at_cast():
            self.advance()
            type_text = self.parse_type()
            while self.tok.is_op("&"):
                self.advance()
                type_text += " & " + self.parse_type()
            self.expect_op(")")
            if self._at_lambda():
                raise self.fail("cast of lambda is not modelled")
            operand = self._parse_unary()
            return self._node(Cast, start, type_text, operand)
        return self._parse_postfix(start, self._parse_primary())

    def _at_cast(self) -> bool:
        save = self.i
        try:
            self.advance()
            first = self.tok
            self.parse_type()
            while self.tok.is_op("&"):
                self.advance()
                self.parse_type()
            if not self.tok.is_op(")"):
                return False
            self.advance()
            nxt = self.tok
            if first.text in PRIMITIVE_TYPES:
                return not nxt.is_op(")", ";", ",", ".", "]", "}")
            if nxt.kind in ("ident", "number", "string", "char"):
                return nxt.kind != "ident" or nxt.text not in KEYWORDS or nxt.text in _LITERAL_WORDS | {"new"}
            return nxt.is_op("(", "!", "~")
        except SourceSyntaxError:
            return False
        finally:
            self.i = save

    def _at_lambda(self) -> bool:
        tok = self.tok
        if tok.kind == "ident" and tok.text not in KEYWORDS and self.peek().is_op("->"):
            return True
        if not tok.is_op("("):
            return False
        depth = 0
        k = self.i
        while k < len(self.tokens):
            t = self.tokens[k]
            if t.is_op("(", "[", "{"):
                depth += 1
            elif t.is_op(")", "]", "}"):
                depth -= 1
                if depth == 0:
                    return k + 1 < len(self.tokens) and self.tokens[k + 1].is_op("->")
            elif t.kind == "eof":
                return False
            k += 1
        return False

    def _parse_lambda(self) -> Expr:
        start = self.tok.start
        if self.tok.is_op("("):
            self._skip_balanced()
        else:
            self.advance()
        self.expect_op("->")
        if self.tok.is_op("{"):
            self._skip_balanced()
        else:
            self.parse_expression()
        return self._node(OpaqueExpr, start, self._slice(start))

    def parse_arguments(self) -> tuple[Expr, ...]:
        self.expect_op("(")
        args: list[Expr] = []
        while not self.tok.is_op(")"):
            args.append(self.parse_expression())
            if not self.tok.is_op(")"):
                self.expect_op(",")
        self.advance()
        return tuple(args)

    def _parse_primary(self) -> Expr:
        tok = self.tok
        start = tok.start
        if tok.kind in ("number", "string", "char"):
            self.advance()
            return self._node(Literal, start, tok.text)
        if tok.is_op("("):
            self.advance()
            expr = self.parse_expression()
            self.expect_op(")")
            return expr
        if tok.kind != "ident":
            raise self.fail("expected expression")
        if tok.text in ("this", "super") and self.peek().is_op("("):
            self.advance()
            return self._node(MethodCall, start, None, tok.text, self.parse_arguments())
        if tok.text in _LITERAL_WORDS:
            self.advance()
            return self._node(Literal, start, tok.text)
        if tok.text == "new":
            return self._parse_new(start)
        if tok.text in KEYWORDS and tok.text not in ("var", "record", "yield"):
            raise self.fail("unexpected keyword")
        self.advance()
        if self.tok.is_op("("):
            return self._node(MethodCall, start, None, tok.text, self.parse_arguments())
        return self._node(Name, start, tok.text)

    def _parse_new(self, start: int) -> Expr:
        self.advance()
        if self.tok.is_op("<"):
            raise self.fail("explicit constructor type arguments are not modelled")
        type_text = self.parse_type(allow_dims=False)
        if self.tok.is_op("["):
            while self.tok.is_op("["):
                self._skip_balanced()
            if self.tok.is_op("{"):
                self._skip_balanced()
            return self._node(OpaqueExpr, start, self._slice(start))
        args = self.parse_arguments()
        if self.tok.is_op("{"):
            self._skip_balanced()
            return self._node(OpaqueExpr, start, self._slice(start))
        return self._node(New, start, type_text, args)

    def _parse_postfix(self, start: int, expr: Expr) -> Expr:
        while True:
            tok = self.tok
            if tok.is_op("."):
                self.advance()
                name_tok = self.tok
                if name_tok.kind != "ident" or (name_tok.text in KEYWORDS and name_tok.text not in ("class", "this")):
                    raise self.fail("expected member name")
                self.advance()
                if self.tok.is_op("("):
                    expr = self._node(MethodCall, start, expr, name_tok.text, self.parse_arguments())
                else:
                    expr = self._node(FieldAccess, start, expr, name_tok.text)
            elif tok.is_op("["):
                self.advance()
                index = self.parse_expression()
                self.expect_op("]")
                expr = self._node(ArrayAccess, start, expr, index)
            elif tok.is_op("++", "--"):
                self.advance()
                expr = self._node(Unary, start, tok.text, expr, True)
            elif tok.is_op("::"):
                self.advance()
                if not self.tok.kind == "ident":
                    raise self.fail("expected method reference name")
                self.advance()
                expr = self._node(OpaqueExpr, start, self._slice(start))
            else:
                return expr


def parse_document(source: str) -> ParsedDocument:
    return Parser(source).parse_document()
