"""Recursive-descent parser for the mini contract language.

The concrete syntax is a Solidity subset.  SafeMath calls ``a.add(b)``,
``a.sub(b)`` and ``a.mul(b)`` are rewritten to checked ``+``, ``-`` and ``*``.
"""

from __future__ import annotations

import re

from . import ast as A
from .errors import ContractSyntaxError, ContractTypeError, DuplicateNameError
from .lexer import Token, TokenStream, tokenize
from .typecheck import check_contract

_ELEMENTARY = re.compile(r"^(uint|int)(\d*)$")
_VISIBILITY = {"public", "internal", "external", "private"}
_IGNORED_MODIFIERS = {"view", "pure", "payable", "virtual", "override"}
_LOCATIONS = {"memory", "storage", "calldata"}
_KEYWORD_TYPES = {"bool", "address", "string", "bytes", "mapping"}
_SAFEMATH = {"add": "+", "sub": "-", "mul": "*", "div": "/"}

# binary precedence, loosest first
_PRECEDENCE: list[tuple[str, ...]] = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", ">", "<=", ">="),
    ("+", "-"),
    ("*", "/"),
]


def parse_contract(source_text: str, width: int = 256) -> A.ContractAst:
    """Parse and type-check one contract.

    ``width`` is the bit width given to unsized ``uint``/``int``.
    Raises ContractSyntaxError, ContractTypeError or DuplicateNameError.
    """
    if not 2 <= width <= 256:
        raise ValueError(f"integer width must be between 2 and 256, got {width}")
    parser = _Parser(tokenize(source_text), width)
    contract = parser.contract()
    return check_contract(contract)


class _Parser:
    def __init__(self, tokens: list[Token], width: int):
        self.ts = TokenStream(tokens)
        self.width = width
        self.struct_names: set[str] = set()

    # -- declarations -------------------------------------------------------

    def contract(self) -> A.ContractAst:
        ts = self.ts
        if ts.at("pragma"):
            while not ts.accept(";"):
                if ts.peek().kind == "eof":
                    raise ts.error("unterminated pragma")
                ts.next()
        ts.expect("contract")
        name = ts.expect_ident().text
        ts.expect("{")
        # pre-scan struct names so `S x;` parses as a declaration
        for k, tok in enumerate(ts.tokens[ts.i:]):
            if tok.text == "struct":
                nxt = ts.tokens[ts.i + k + 1]
                if nxt.kind == "ident":
                    self.struct_names.add(nxt.text)
        state_vars: list[A.VarDecl] = []
        structs: list[A.StructDecl] = []
        functions: list[A.FunctionDecl] = []
        constructor = None
        while not ts.at("}"):
            tok = ts.peek()
            if tok.kind == "eof":
                raise ts.error("expected '}' at end of contract")
            if ts.at("struct"):
                structs.append(self.struct_decl())
            elif ts.at("function"):
                functions.append(self.function_decl())
            elif ts.at("constructor"):
                if constructor is not None:
                    raise DuplicateNameError("duplicate constructor", tok.line, tok.col)
                constructor = self.function_decl(is_constructor=True)
            else:
                state_vars.append(self.state_var_decl())
        ts.expect("}")
        if ts.peek().kind != "eof":
            raise ts.error("unexpected input after contract")
        self._check_duplicates(state_vars, functions, structs)
        return A.ContractAst(name, tuple(state_vars), tuple(structs), tuple(functions),
                             constructor, self.width)

    def _check_duplicates(self, state_vars, functions, structs) -> None:
        seen: set[str] = set()
        for v in state_vars:
            if v.name in seen:
                raise DuplicateNameError(f"duplicate state variable {v.name!r}", *v.pos)
            seen.add(v.name)
        sigs: set[tuple[str, int]] = set()
        names: set[str] = set()
        for f in functions:
            if (f.name, len(f.params)) in sigs or f.name in names:
                raise DuplicateNameError(f"duplicate function {f.name!r}", *f.pos)
            sigs.add((f.name, len(f.params)))
            names.add(f.name)
        snames: set[str] = set()
        for s in structs:
            if s.name in snames:
                raise DuplicateNameError(f"duplicate struct {s.name!r}", *s.pos)
            snames.add(s.name)

    def struct_decl(self) -> A.StructDecl:
        ts = self.ts
        start = ts.expect("struct")
        name = ts.expect_ident().text
        ts.expect("{")
        fields = []
        while not ts.accept("}"):
            tok = ts.peek()
            ty = self.type_()
            fname = ts.expect_ident().text
            ts.expect(";")
            fields.append(A.VarDecl(fname, ty, pos=(tok.line, tok.col)))
        return A.StructDecl(name, tuple(fields), pos=(start.line, start.col))

    def state_var_decl(self) -> A.VarDecl:
        ts = self.ts
        tok = ts.peek()
        ty = self.type_()
        while ts.peek().text in _VISIBILITY or ts.at("constant"):
            ts.next()
        name = ts.expect_ident().text
        init = None
        if ts.accept("="):
            init = self.expr()
        ts.expect(";")
        return A.VarDecl(name, ty, init, pos=(tok.line, tok.col))

    def function_decl(self, is_constructor: bool = False) -> A.FunctionDecl:
        ts = self.ts
        start = ts.next()
        name = "constructor" if is_constructor else ts.expect_ident().text
        params = self.params()
        visibility = "public"
        returns = None
        while not ts.at("{"):
            tok = ts.peek()
            if tok.text in _VISIBILITY:
                ts.next()
                visibility = "public" if tok.text in ("public", "external") else "internal"
            elif tok.text in _IGNORED_MODIFIERS:
                ts.next()
            elif ts.accept("returns"):
                ts.expect("(")
                returns = self.type_()
                while ts.peek().text in _LOCATIONS:
                    ts.next()
                if ts.peek().kind == "ident":
                    ts.next()
                ts.expect(")")
            else:
                raise ts.error(f"unexpected {tok.text!r} in function header")
        body = self.block()
        return A.FunctionDecl(name, params, returns, body, visibility, pos=(start.line, start.col))

    def params(self) -> tuple[A.VarDecl, ...]:
        ts = self.ts
        ts.expect("(")
        out = []
        if not ts.at(")"):
            while True:
                tok = ts.peek()
                ty = self.type_()
                while ts.peek().text in _LOCATIONS:
                    ts.next()
                pname = ts.expect_ident().text
                out.append(A.VarDecl(pname, ty, pos=(tok.line, tok.col)))
                if not ts.accept(","):
                    break
        ts.expect(")")
        return tuple(out)

    # -- types --------------------------------------------------------------

    def is_type_start(self, k: int = 0) -> bool:
        tok = self.ts.peek(k)
        if tok.kind != "ident":
            return False
        if tok.text in _KEYWORD_TYPES or _ELEMENTARY.match(tok.text):
            return True
        return tok.text in self.struct_names

    def type_(self) -> A.Type:
        ts = self.ts
        tok = ts.peek()
        if tok.kind != "ident":
            raise ts.error(f"expected type, found {tok.text!r}")
        if ts.accept("mapping"):
            ts.expect("(")
            key = self.type_()
            ts.expect("=>")
            value = self.type_()
            ts.expect(")")
            ty: A.Type = A.MappingT(key, value)
        else:
            ts.next()
            ty = self.elementary(tok)
        while ts.at("[") and ts.at("]", 1):
            ts.next()
            ts.next()
            ty = A.ArrayT(ty)
        return ty

    def elementary(self, tok: Token) -> A.Type:
        text = tok.text
        m = _ELEMENTARY.match(text)
        if m:
            if m.group(2):
                width = int(m.group(2))
                if width % 8 or not 8 <= width <= 256:
                    raise ContractTypeError(f"invalid integer width {width}", tok.line, tok.col)
            else:
                width = self.width
            return A.UIntT(width) if m.group(1) == "uint" else A.IntT(width)
        if text == "bool":
            return A.BoolT()
        if text == "address":
            if self.ts.at("payable"):
                self.ts.next()
            return A.AddressT()
        if text == "string":
            return A.StringT()
        if text == "bytes":
            return A.BytesT()
        if text in self.struct_names:
            return A.StructT(text)
        raise ContractTypeError(f"unknown type {text}", tok.line, tok.col)

    # -- statements ---------------------------------------------------------

    def block(self) -> tuple[A.Stmt, ...]:
        ts = self.ts
        ts.expect("{")
        stmts = []
        while not ts.accept("}"):
            if ts.peek().kind == "eof":
                raise ts.error("expected '}'")
            stmts.append(self.statement())
        return tuple(stmts)

    def body_or_stmt(self) -> tuple[A.Stmt, ...]:
        if self.ts.at("{"):
            return self.block()
        return (self.statement(),)

    def statement(self) -> A.Stmt:
        ts = self.ts
        tok = ts.peek()
        pos = (tok.line, tok.col)
        if ts.accept("if"):
            ts.expect("(")
            cond = self.expr()
            ts.expect(")")
            then = self.body_or_stmt()
            orelse: tuple[A.Stmt, ...] = ()
            if ts.accept("else"):
                orelse = self.body_or_stmt()
            return A.If(cond, then, orelse, pos=pos)
        if ts.accept("for"):
            ts.expect("(")
            init = None if ts.at(";") else self.simple_statement()
            ts.expect(";")
            cond = self.expr()
            ts.expect(";")
            update = None if ts.at(")") else self.simple_statement()
            ts.expect(")")
            body = self.body_or_stmt()
            return A.For(init, cond, update, body, pos=pos)
        if ts.accept("require"):
            ts.expect("(")
            cond = self.expr()
            if ts.accept(","):
                self.expect_string()
            ts.expect(")")
            ts.expect(";")
            return A.Require(cond, pos=pos)
        if ts.accept("assert"):
            ts.expect("(")
            cond = self.expr()
            ts.expect(")")
            ts.expect(";")
            return A.Assert(cond, pos=pos)
        if ts.accept("revert"):
            if ts.accept("("):
                if not ts.at(")"):
                    self.expect_string()
                ts.expect(")")
            ts.expect(";")
            return A.Revert(pos=pos)
        if ts.accept("return"):
            value = None if ts.at(";") else self.expr()
            ts.expect(";")
            return A.Return(value, pos=pos)
        if ts.at("emit"):
            raise ts.error("event emission is not supported")
        stmt = self.simple_statement()
        ts.expect(";")
        return stmt

    def expect_string(self) -> None:
        tok = self.ts.next()
        if tok.kind != "str":
            raise ContractSyntaxError("expected string literal", tok.line, tok.col)

    def simple_statement(self) -> A.Stmt:
        """Declaration, assignment or call, without the trailing ';'."""
        ts = self.ts
        tok = ts.peek()
        pos = (tok.line, tok.col)
        if self.is_type_start() and (ts.at("mapping") or not ts.at("(", 1)):
            ty = self.type_()
            while ts.peek().text in _LOCATIONS:
                ts.next()
            name = ts.expect_ident().text
            init = self.expr() if ts.accept("=") else None
            return A.LocalDecl(ty, name, init, pos=pos)
        target = self.expr()
        if ts.accept("="):
            return A.Assign(target, self.expr(), pos=pos)
        for op, bop in (("+=", "+"), ("-=", "-")):
            if ts.accept(op):
                value = self.expr()
                return A.Assign(target, A.BinOp(bop, target, value, pos=pos), pos=pos)
        for op, bop in (("++", "+"), ("--", "-")):
            if ts.accept(op):
                return A.Assign(target, A.BinOp(bop, target, A.Num(1, pos=pos), pos=pos), pos=pos)
        if isinstance(target, A.Call):
            return A.ExprStmt(target, pos=pos)
        raise ContractSyntaxError("expected assignment or call", *pos)

    # -- expressions --------------------------------------------------------

    def expr(self, level: int = 0) -> A.Expr:
        if level == len(_PRECEDENCE):
            return self.unary()
        left = self.expr(level + 1)
        ops = _PRECEDENCE[level]
        while self.ts.peek().kind == "op" and self.ts.peek().text in ops:
            tok = self.ts.next()
            right = self.expr(level + 1)
            left = A.BinOp(tok.text, left, right, pos=(tok.line, tok.col))
        return left

    def unary(self) -> A.Expr:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "op" and tok.text in ("!", "-"):
            ts.next()
            operand = self.unary()
            if tok.text == "-" and isinstance(operand, A.Num):
                raise ContractTypeError("negative literals are not supported", tok.line, tok.col)
            return A.UnOp(tok.text, operand, pos=(tok.line, tok.col))
        return self.postfix(self.primary())

    def postfix(self, e: A.Expr) -> A.Expr:
        ts = self.ts
        while True:
            tok = ts.peek()
            pos = (tok.line, tok.col)
            if ts.accept("["):
                idx = self.expr()
                ts.expect("]")
                e = A.Index(e, idx, pos=pos)
            elif ts.accept("."):
                name = ts.expect_ident().text
                if name in _SAFEMATH and ts.at("("):
                    ts.expect("(")
                    arg = self.expr()
                    ts.expect(")")
                    e = A.BinOp(_SAFEMATH[name], e, arg, pos=pos)
                elif name == "length":
                    e = A.Length(e, pos=pos)
                else:
                    e = A.Member(e, name, pos=pos)
            else:
                return e

    def primary(self) -> A.Expr:
        ts = self.ts
        tok = ts.next()
        pos = (tok.line, tok.col)
        if tok.kind == "num":
            return A.Num(int(tok.text, 0), pos=pos)
        if tok.kind == "str":
            return A.StrLit(bytes(tok.text[1:-1], "utf-8").decode("unicode_escape"), pos=pos)
        if tok.kind == "op" and tok.text == "(":
            e = self.expr()
            ts.expect(")")
            return e
        if tok.kind != "ident":
            raise ContractSyntaxError(f"unexpected {tok.text or 'end of input'!r}", *pos)
        text = tok.text
        if text == "true" or text == "false":
            return A.BoolLit(text == "true", pos=pos)
        if text == "msg":
            ts.expect(".")
            field = ts.expect_ident()
            if field.text != "sender":
                raise ContractSyntaxError(f"unsupported msg.{field.text}", field.line, field.col)
            return A.MsgSender(pos=pos)
        if text == "block":
            ts.expect(".")
            field = ts.expect_ident()
            if field.text != "number":
                raise ContractSyntaxError(f"unsupported block.{field.text}", field.line, field.col)
            return A.BlockNumber(pos=pos)
        if text == "unchecked":
            ts.expect("(")
            e = self.expr()
            ts.expect(")")
            return A.Unchecked(e, pos=pos)
        if text == "address" and ts.at("("):
            ts.expect("(")
            if ts.peek().kind == "num" and ts.at(")", 1):
                num = ts.next()
                ts.expect(")")
                return A.AddrLit(int(num.text, 0), pos=pos)
            e = self.expr()
            ts.expect(")")
            return A.Cast(A.AddressT(), e, pos=pos)
        if _ELEMENTARY.match(text) and ts.at("("):
            target = self.elementary(tok)
            ts.expect("(")
            e = self.expr()
            ts.expect(")")
            return A.Cast(target, e, pos=pos)
        if ts.at("("):
            ts.expect("(")
            args = []
            if not ts.at(")"):
                while True:
                    args.append(self.expr())
                    if not ts.accept(","):
                        break
            ts.expect(")")
            return A.Call(text, tuple(args), pos=pos)
        return A.Name(text, pos=pos)
