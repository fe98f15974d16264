from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ContractSyntaxError


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "num", "str", "op", "eof"
    text: str
    line: int
    col: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<num>0[xX][0-9a-fA-F]+|[0-9]+)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<str>"(?:[^"\\\n]|\\.)*")
  | (?P<op>=>|==|!=|<=|>=|&&|\|\||\+\+|--|\+=|-=|[-+*/<>=!(){}\[\];,.:?])
    """,
    re.VERBOSE | re.DOTALL,
)


def tokenize(text: str, op_pattern: re.Pattern[str] = _TOKEN_RE) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = op_pattern.match(text, pos)
        if m is None:
            raise ContractSyntaxError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        lexeme = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "bcomment":
            nls = lexeme.count("\n")
            if nls:
                line += nls
                line_start = pos + lexeme.rfind("\n") + 1
        elif kind not in ("ws", "lcomment"):
            tokens.append(Token(kind, lexeme, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0

    def peek(self, k: int = 0) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, text: str, k: int = 0) -> bool:
        tok = self.peek(k)
        return tok.kind in ("op", "ident") and tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if not self.at(text):
            found = tok.text or "end of input"
            raise ContractSyntaxError(f"expected {text!r}, found {found!r}", tok.line, tok.col)
        return self.next()

    def expect_ident(self) -> Token:
        tok = self.peek()
        if tok.kind != "ident":
            found = tok.text or "end of input"
            raise ContractSyntaxError(f"expected identifier, found {found!r}", tok.line, tok.col)
        return self.next()

    def error(self, message: str) -> ContractSyntaxError:
        tok = self.peek()
        return ContractSyntaxError(message, tok.line, tok.col)
