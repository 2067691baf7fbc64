from __future__ import annotations

from dataclasses import dataclass

from .ast_nodes import Span
from .errors import SourceSyntaxError

KEYWORDS = frozenset(
    """abstract assert boolean break byte case catch char class const continue default do
    double else enum extends final finally float for goto if implements import instanceof
    int interface long native new package private protected public return short static
    strictfp super switch synchronized this throw throws transient try void volatile while
    true false null var record yield""".split()
)
# contextual words that are still legal identifiers
SOFT_KEYWORDS = frozenset({"var", "record", "yield"})
RESERVED_WORDS = KEYWORDS - SOFT_KEYWORDS

PRIMITIVE_TYPES = frozenset({"boolean", "byte", "char", "short", "int", "long", "float", "double", "void"})

# longest first; '>' is always emitted alone (or as '>=') so generics can close with '>>'
_OPERATORS = sorted(
    """>>>= <<= ... -> :: ++ -- && || == != <= >= += -= *= /= %= &= |= ^= <<
    ( ) { } [ ] ; , . @ = < > ! ~ ? : + - * / & | ^ %""".split(),
    key=len,
    reverse=True,
)
_OPERATORS = [op for op in _OPERATORS if not (op.startswith(">") and op not in (">", ">="))]

_PAIRS = {")": "(", "]": "[", "}": "{"}


@dataclass(frozen=True)
class Token:
    kind: str  # ident | number | string | char | op | eof
    text: str
    start: int
    end: int
    line: int

    def is_op(self, *texts: str) -> bool:
        return self.kind == "op" and self.text in texts

    def is_word(self, *texts: str) -> bool:
        return self.kind == "ident" and self.text in texts


def is_identifier(text: str) -> bool:
    if not text or text in RESERVED_WORDS:
        return False
    if not (text[0].isalpha() or text[0] in "_$"):
        return False
    return all(ch.isalnum() or ch in "_$" for ch in text)


class Lexer:
    def __init__(self, source: str):
        self.source = source
        self.pos = 0
        self.line = 1
        self.tokens: list[Token] = []

    def _span(self, start: int, end: int) -> Span:
        return Span(start, end, self.source.count("\n", 0, start) + 1, self.source.count("\n", 0, end) + 1)

    def _error(self, start: int, message: str) -> SourceSyntaxError:
        return SourceSyntaxError(self._span(start, min(start + 1, len(self.source))), message)

    def _advance_to(self, end: int) -> None:
        self.line += self.source.count("\n", self.pos, end)
        self.pos = end

    def tokenize(self) -> list[Token]:
        src = self.source
        n = len(src)
        while self.pos < n:
            ch = src[self.pos]
            if ch in " \t\r\n\f":
                self._advance_to(self.pos + 1)
            elif src.startswith("//", self.pos):
                end = src.find("\n", self.pos)
                self._advance_to(n if end < 0 else end)
            elif src.startswith("/*", self.pos):
                end = src.find("*/", self.pos + 2)
                if end < 0:
                    raise self._error(self.pos, "unterminated comment")
                self._advance_to(end + 2)
            elif ch.isalpha() or ch in "_$":
                end = self.pos + 1
                while end < n and (src[end].isalnum() or src[end] in "_$"):
                    end += 1
                self._emit("ident", end)
            elif ch.isdigit() or (ch == "." and self.pos + 1 < n and src[self.pos + 1].isdigit()):
                self._emit("number", self._scan_number())
            elif ch == '"':
                if src.startswith('"""', self.pos):
                    end = src.find('"""', self.pos + 3)
                    if end < 0:
                        raise self._error(self.pos, "unterminated text block")
                    self._emit("string", end + 3)
                else:
                    self._emit("string", self._scan_quoted('"'))
            elif ch == "'":
                self._emit("char", self._scan_quoted("'"))
            else:
                for op in _OPERATORS:
                    if src.startswith(op, self.pos):
                        self._emit("op", self.pos + len(op))
                        break
                else:
                    raise self._error(self.pos, f"unexpected character {ch!r}")
        self.tokens.append(Token("eof", "", n, n, self.line))
        self._check_balance()
        return self.tokens

    def _emit(self, kind: str, end: int) -> None:
        self.tokens.append(Token(kind, self.source[self.pos:end], self.pos, end, self.line))
        self._advance_to(end)

    def _scan_number(self) -> int:
        src, end, n = self.source, self.pos, len(self.source)
        if src.startswith(("0x", "0X", "0b", "0B"), end):
            end += 2
        while end < n and (src[end].isalnum() or src[end] in "._"):
            if src[end] in "eE" and end + 1 < n and src[end + 1] in "+-" and not src.startswith(("0x", "0X"), self.pos):
                end += 2
                continue
            end += 1
        return end

    def _scan_quoted(self, quote: str) -> int:
        src, end, n = self.source, self.pos + 1, len(self.source)
        while end < n:
            if src[end] == "\\":
                end += 2
                continue
            if src[end] == quote:
                return end + 1
            if src[end] == "\n":
                break
            end += 1
        raise self._error(self.pos, "unterminated literal")

    def _check_balance(self) -> None:
        stack: list[Token] = []
        for tok in self.tokens:
            if tok.kind != "op":
                continue
            if tok.text in "([{":
                stack.append(tok)
            elif tok.text in ")]}":
                if not stack or stack[-1].text != _PAIRS[tok.text]:
                    raise SourceSyntaxError(self._span(tok.start, tok.end), f"unbalanced {tok.text!r}")
                stack.pop()
        if stack:
            tok = stack[-1]
            raise SourceSyntaxError(self._span(tok.start, tok.end), f"unclosed {tok.text!r}")


def tokenize(source: str) -> list[Token]:
    return Lexer(source).tokenize()
