"""Syntax tree for mini contracts.

Nodes are frozen dataclasses so trees can be shared, hashed and compared
structurally.  Source positions are carried but excluded from equality.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class UIntT:
    width: int = 256

    @property
    def lo(self) -> int:
        return 0

    @property
    def hi(self) -> int:
        return (1 << self.width) - 1

    def __str__(self) -> str:
        return f"uint{self.width}"


@dataclass(frozen=True)
class IntT:
    width: int = 256

    @property
    def lo(self) -> int:
        return -(1 << (self.width - 1))

    @property
    def hi(self) -> int:
        return (1 << (self.width - 1)) - 1

    def __str__(self) -> str:
        return f"int{self.width}"


@dataclass(frozen=True)
class BoolT:
    def __str__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class AddressT:
    def __str__(self) -> str:
        return "address"


@dataclass(frozen=True)
class StringT:
    def __str__(self) -> str:
        return "string"


@dataclass(frozen=True)
class BytesT:
    def __str__(self) -> str:
        return "bytes"


@dataclass(frozen=True)
class ArrayT:
    elem: "Type"

    def __str__(self) -> str:
        return f"{self.elem}[]"


@dataclass(frozen=True)
class MappingT:
    key: "Type"
    value: "Type"

    def __str__(self) -> str:
        return f"mapping({self.key} => {self.value})"


@dataclass(frozen=True)
class StructT:
    name: str

    def __str__(self) -> str:
        return self.name


Type = Union[UIntT, IntT, BoolT, AddressT, StringT, BytesT, ArrayT, MappingT, StructT]
IntegerT = (UIntT, IntT)


def is_integer(t: Optional[Type]) -> bool:
    return isinstance(t, IntegerT)


def mapping_depth(t: Type) -> int:
    depth = 0
    while isinstance(t, MappingT):
        depth += 1
        t = t.value
    return depth


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------

Pos = tuple[int, int]

BINARY_OPS = ("+", "-", "*", "/", "<", ">", "<=", ">=", "==", "!=", "&&", "||")
ARITH_OPS = ("+", "-", "*", "/")
COMPARE_OPS = ("<", ">", "<=", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")


@dataclass(frozen=True)
class Num:
    value: int
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BoolLit:
    value: bool
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class AddrLit:
    """`address(k)`; address(0) is the zero address."""
    index: int
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class StrLit:
    value: str
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Name:
    id: str
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class MsgSender:
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BlockNumber:
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Index:
    base: "Expr"
    index: "Expr"
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Member:
    base: "Expr"
    field: str
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Length:
    base: "Expr"
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class UnOp:
    op: str  # "!" or "-"
    operand: "Expr"
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Unchecked:
    """Arithmetic inside wraps modulo 2^w instead of reverting."""
    expr: "Expr"
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Cast:
    target: Type
    expr: "Expr"
    ty: Optional[Type] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


Expr = Union[Num, BoolLit, AddrLit, StrLit, Name, MsgSender, BlockNumber, Index,
             Member, Length, BinOp, UnOp, Unchecked, Call, Cast]


# ---------------------------------------------------------------------------
# Statements and declarations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalDecl:
    ty: Type
    name: str
    init: Optional[Expr] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Assign:
    target: Expr
    value: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class For:
    init: Optional["Stmt"]
    cond: Expr
    update: Optional["Stmt"]
    body: tuple["Stmt", ...]
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Require:
    cond: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Assert:
    cond: Expr
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Revert:
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class ExprStmt:
    expr: Call
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


Stmt = Union[LocalDecl, Assign, If, For, Require, Assert, Revert, Return, ExprStmt]


@dataclass(frozen=True)
class VarDecl:
    name: str
    ty: Type
    init: Optional[Expr] = None
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class StructDecl:
    name: str
    fields: tuple[VarDecl, ...]
    pos: Pos = field(default=(0, 0), compare=False, repr=False)


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: tuple[VarDecl, ...]
    returns: Optional[Type]
    body: tuple[Stmt, ...]
    visibility: str = "public"
    pos: Pos = field(default=(0, 0), compare=False, repr=False)

    @property
    def is_public(self) -> bool:
        return self.visibility == "public"


@dataclass(frozen=True)
class ContractAst:
    name: str
    state_vars: tuple[VarDecl, ...]
    structs: tuple[StructDecl, ...] = ()
    functions: tuple[FunctionDecl, ...] = ()
    constructor: Optional[FunctionDecl] = None
    width: int = 256

    def state_var(self, name: str) -> Optional[VarDecl]:
        for v in self.state_vars:
            if v.name == name:
                return v
        return None

    def function(self, name: str) -> Optional[FunctionDecl]:
        for f in self.functions:
            if f.name == name:
                return f
        return None

    def struct(self, name: str) -> Optional[StructDecl]:
        for s in self.structs:
            if s.name == name:
                return s
        return None

    @property
    def public_functions(self) -> tuple[FunctionDecl, ...]:
        return tuple(f for f in self.functions if f.is_public)

    @property
    def maxvalue(self) -> int:
        return (1 << self.width) - 1


IMPLICIT_PARAMS = {"msg.sender": AddressT(), "block.number": UIntT(256)}


def iter_exprs(e: Expr):
    """Pre-order walk over an expression tree."""
    yield e
    match e:
        case Index(base, index):
            yield from iter_exprs(base)
            yield from iter_exprs(index)
        case Member(base) | Length(base):
            yield from iter_exprs(base)
        case BinOp(_, left, right):
            yield from iter_exprs(left)
            yield from iter_exprs(right)
        case UnOp(_, operand):
            yield from iter_exprs(operand)
        case Unchecked(inner) | Cast(_, inner):
            yield from iter_exprs(inner)
        case Call(_, args):
            for a in args:
                yield from iter_exprs(a)


def root_name(e: Expr) -> Optional[str]:
    """Name at the root of an lvalue-like access path."""
    while isinstance(e, (Index, Member, Length)):
        e = e.base
    if isinstance(e, Name):
        return e.id
    return None
