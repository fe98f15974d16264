"""Verification conditions by bounded symbolic execution of one function.

Each public function is executed symbolically from an arbitrary entry state.
``require`` conditions and the no-overflow side conditions of checked
arithmetic become path assumptions (the reverting alternatives produce no
obligations), ``assert`` conditions become obligations, and every
non-reverting exit receives one obligation per enabled annotation.

Storage is modelled per access family: ``balances[]`` or ``allows[][]`` name
an uninterpreted function of the entry state, and writes are layered on top
as if-then-else chains over index equality.  ``SumMap`` and ``len`` of a
mapping are ghost quantities: an entry variable plus the net effect of every
write.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Iterable, Optional, Protocol

from ..lang import ast as A
from ..spec import ast as S
from . import logic as T
from .logic import FALSE, TRUE, Formula, Lin

ADDRESS_HI = (1 << 160) - 1
INLINE_DEPTH = 8


class UnsupportedConstruct(Exception):
    pass


class Annotation(Protocol):
    id: str
    scope: S.Scope
    predicate: S.Predicate


@dataclass(frozen=True)
class Note:
    """A plain annotation, for callers that have no candidate objects."""
    id: str
    scope: S.Scope
    predicate: S.Predicate


@dataclass(frozen=True)
class Source:
    kind: str  # "candidate" | "assertion"
    ref: Any

    def __str__(self) -> str:
        if self.kind == "assertion":
            line, col = self.ref
            return f"assert at {line}:{col}"
        return f"candidate {self.ref}"


@dataclass(frozen=True)
class VerificationQuery:
    function: str
    path_id: int
    assumptions: tuple[Formula, ...]
    obligation: Formula
    source: Source
    truncated: bool = False

    @property
    def key(self) -> tuple:
        return (tuple(sorted({a.sk for a in self.assumptions})), self.obligation.sk, self.truncated)


def value_bounds(ty: A.Type, contract: A.ContractAst) -> tuple[Optional[int], Optional[int]]:
    match ty:
        case A.UIntT():
            return 0, contract.maxvalue
        case A.IntT():
            half = 1 << (contract.width - 1)
            return -half, half - 1
        case A.BoolT():
            return 0, 1
        case A.AddressT():
            return 0, ADDRESS_HI
    raise UnsupportedConstruct(f"values of type {ty}")


def _to_cell(v) -> Lin:
    return T.bool_to_int(v) if not isinstance(v, Lin) else v


def _from_cell(v: Lin, ty: A.Type):
    return T.int_to_bool(v) if isinstance(ty, A.BoolT) else v


# ---------------------------------------------------------------------------
# Symbolic storage
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ParamArray:
    name: str
    elem: A.Type

    @property
    def length(self) -> Lin:
        return T.var(f"p.{self.name}.length", 0, None)


class SymState:
    """Storage as a function of the entry state plus the writes made so far."""

    def __init__(self, contract: A.ContractAst, tag: str = ""):
        self.contract = contract
        self.tag = tag
        self.scalars: dict[str, Lin] = {}
        self.writes: dict[str, tuple[tuple[tuple[Lin, ...], Lin, Lin], ...]] = {}

    def copy(self) -> "SymState":
        other = SymState(self.contract, self.tag)
        other.scalars = dict(self.scalars)
        other.writes = dict(self.writes)
        return other

    def bounds(self, ty: A.Type):
        return value_bounds(ty, self.contract)

    def scalar(self, name: str, ty: A.Type) -> Lin:
        v = self.scalars.get(name)
        if v is None:
            lo, hi = self.bounds(ty)
            v = T.var(f"s.{name}{self.tag}", lo, hi)
        return v

    def set_scalar(self, name: str, value: Lin) -> None:
        self.scalars[name] = value

    def read(self, family: str, keys: tuple[Lin, ...], ty: A.Type) -> Lin:
        lo, hi = self.bounds(ty)
        value = T.app(f"m.{family}{self.tag}", keys, lo, hi)
        for wkeys, wval, _ in self.writes.get(family, ()):
            same = T.and_(*(T.eq(a, b) for a, b in zip(keys, wkeys)))
            value = T.ite(same, wval, value)
        return value

    def write(self, family: str, keys: tuple[Lin, ...], value: Lin, ty: A.Type) -> None:
        old = self.read(family, keys, ty)
        self.writes[family] = self.writes.get(family, ()) + ((keys, value, old),)

    def total(self, family: str, ty: A.Type) -> Lin:
        """Ghost ``SumMap``: entry sum plus the delta of every write."""
        lo, _ = self.bounds(ty)
        parts = [T.var(f"g.sum.{family}{self.tag}", 0 if lo == 0 else None, None)]
        for _, new, old in self.writes.get(family, ()):
            parts.append(T.sub(new, old))
        return T.add(*parts)

    def count(self, family: str) -> Lin:
        """Ghost ``len`` of a mapping: number of non-default entries."""
        parts = [T.var(f"g.len.{family}{self.tag}", 0, None)]
        for _, new, old in self.writes.get(family, ()):
            parts.append(T.sub(T.bool_to_int(T.cmp("!=", new, T.ZERO)),
                               T.bool_to_int(T.cmp("!=", old, T.ZERO))))
        return T.add(*parts)

    def array_length(self, name: str) -> Lin:
        return T.var(f"len.{name}", 0, self.contract.maxvalue)  # lengths never change


def ghost_axioms(formulas: Iterable[Formula]) -> list[Formula]:
    """Entry relations between ghost aggregates and the base reads in use."""
    atoms: dict[str, T.Atom] = {}
    for f in formulas:
        for a in T.atoms_of(f):
            atoms[a.sk] = a
    sums = {a.name[len("g.sum."):]: a for a in atoms.values()
            if isinstance(a, T.Var) and a.name.startswith("g.sum.")}
    counts = {a.name[len("g.len."):]: a for a in atoms.values()
              if isinstance(a, T.Var) and a.name.startswith("g.len.")}
    if not sums and not counts:
        return []
    reads: dict[str, list[T.App]] = {}
    for a in atoms.values():
        if isinstance(a, T.App) and len(a.args) == 1 and a.fn.startswith("m."):
            reads.setdefault(a.fn[2:], []).append(a)
    out: list[Formula] = []
    for family, total in sums.items():
        rs = reads.get(family, [])
        if total.lo is None:
            continue  # signed values: no ordering between parts and whole
        s = T.atom(total)
        for i, a in enumerate(rs):
            out.append(T.cmp("<=", T.atom(a), s))
            for b in rs[i + 1:]:
                out.append(T.or_(T.eq(a.args[0], b.args[0]),
                                 T.cmp("<=", T.add(T.atom(a), T.atom(b)), s)))
    for family, n in counts.items():
        rs = reads.get(family, [])
        c = T.atom(n)
        for i, a in enumerate(rs):
            nz_a = T.cmp("!=", T.atom(a), T.ZERO)
            out.append(T.implies(nz_a, T.cmp(">=", c, T.ONE)))
            for b in rs[i + 1:]:
                both = T.and_(nz_a, T.cmp("!=", T.atom(b), T.ZERO), T.cmp("!=", a.args[0], b.args[0]))
                out.append(T.implies(both, T.cmp(">=", c, T.const(2))))
    return [f for f in out if f is not TRUE]


# ---------------------------------------------------------------------------
# Symbolic execution of contract code
# ---------------------------------------------------------------------------

@dataclass
class _Path:
    pc: list[Formula]
    state: SymState
    env: dict[str, Any]
    ret: Any = None

    def fork(self) -> "_Path":
        return _Path(list(self.pc), self.state.copy(), dict(self.env), self.ret)

    def assume(self, f: Formula) -> None:
        if f is not TRUE:
            self.pc.append(f)

    @property
    def dead(self) -> bool:
        return FALSE in self.pc


def _subexprs(e: A.Expr, guarded: bool = False):
    """Yield (expr, under_short_circuit) pairs, children first."""
    match e:
        case A.Index(base, index):
            yield from _subexprs(base, guarded)
            yield from _subexprs(index, guarded)
        case A.Member(base) | A.Length(base) | A.UnOp(_, base) | A.Unchecked(base) | A.Cast(_, base):
            yield from _subexprs(base, guarded)
        case A.BinOp(op, left, right):
            yield from _subexprs(left, guarded)
            yield from _subexprs(right, guarded or op in A.LOGIC_OPS)
        case A.Call(_, args):
            for a in args:
                yield from _subexprs(a, guarded)
    yield e, guarded


def _replace(e: A.Expr, target: A.Expr, new: A.Expr) -> A.Expr:
    if e is target:
        return new
    changes = {}
    for f in dataclasses.fields(e):
        v = getattr(e, f.name)
        if isinstance(v, tuple) and v and all(hasattr(x, "__dataclass_fields__") for x in v):
            nv = tuple(_replace(x, target, new) for x in v)
            if any(a is not b for a, b in zip(nv, v)):
                changes[f.name] = nv
        elif hasattr(v, "__dataclass_fields__") and not isinstance(v, A.Type.__args__):
            nv = _replace(v, target, new)
            if nv is not v:
                changes[f.name] = nv
    return dataclasses.replace(e, **changes) if changes else e


def _immediate_exprs(s: A.Stmt) -> list[A.Expr]:
    match s:
        case A.LocalDecl(_, _, init):
            return [init] if init is not None else []
        case A.Assign(target, value):
            return [value, target]
        case A.If(cond) | A.Require(cond) | A.Assert(cond):
            return [cond]
        case A.Return(value):
            return [value] if value is not None else []
        case A.ExprStmt(call):
            return [call]
    return []


def _map_immediate(s: A.Stmt, target: A.Expr, new: A.Expr) -> A.Stmt:
    match s:
        case A.LocalDecl(_, _, init):
            return dataclasses.replace(s, init=_replace(init, target, new))
        case A.Assign(t, v):
            return dataclasses.replace(s, target=_replace(t, target, new), value=_replace(v, target, new))
        case A.If(cond) | A.Require(cond) | A.Assert(cond):
            return dataclasses.replace(s, cond=_replace(cond, target, new))
        case A.Return(value):
            return dataclasses.replace(s, value=_replace(value, target, new))
        case A.ExprStmt(call):
            return dataclasses.replace(s, expr=_replace(call, target, new))
    return s


class _Executor:
    def __init__(self, contract: A.ContractAst, loop_bound: int):
        self.contract = contract
        self.loop_bound = loop_bound
        self.assertions: list[tuple[tuple[Formula, ...], Formula, A.Pos]] = []
        self.truncated: list[_Path] = []
        self.fresh = 0
        self.depth = 0

    # -- arithmetic ----------------------------------------------------------

    def bounds(self, ty: A.Type):
        return value_bounds(ty if A.is_integer(ty) else A.UIntT(), self.contract)

    def arith(self, op: str, a: Lin, b: Lin, ty: A.Type, p: _Path, checked: bool) -> Lin:
        lo, hi = self.bounds(ty)
        modulus = 1 << self.contract.width
        match op:
            case "+":
                r = T.add(a, b)
            case "-":
                r = T.sub(a, b)
            case "*":
                r = T.mul(a, b)
            case "/":
                p.assume(T.cmp("!=", b, T.ZERO))
                r = T.div(a, b)
            case _:
                raise UnsupportedConstruct(f"operator {op}")
        if checked:
            p.assume(T.cmp("<=", r, T.const(hi)))
            p.assume(T.cmp(">=", r, T.const(lo)))
            return r
        if op in ("+", "-"):
            return T.ite(T.cmp(">", r, T.const(hi)), T.sub(r, T.const(modulus)),
                         T.ite(T.cmp("<", r, T.const(lo)), T.add(r, T.const(modulus)), r))
        if op == "*":
            if lo != 0:
                raise UnsupportedConstruct("unchecked signed multiplication")
            return T.sub(r, T.scale(T.div(r, T.const(modulus)), modulus))
        return r

    # -- expressions ---------------------------------------------------------

    def access(self, e: A.Expr, p: _Path, spec: bool = False):
        """Resolve an Index/Member chain to (family, keys) on storage or a parameter array."""
        parts: list[str] = []
        keys: list[Lin] = []
        node = e
        chain = []
        while isinstance(node, (A.Index, A.Member)):
            chain.append(node)
            node = node.base
        chain.reverse()
        if not isinstance(node, A.Name):
            raise UnsupportedConstruct("access through a non-variable")
        root = node.id
        if root in p.env:
            arr = p.env[root]
            if isinstance(arr, ParamArray) and len(chain) == 1 and isinstance(chain[0], A.Index):
                idx = self.eval(chain[0].index, p)
                p.assume(T.cmp(">=", idx, T.ZERO))
                p.assume(T.cmp("<", idx, arr.length))
                return ("param", arr, idx)
            raise UnsupportedConstruct(f"access into local {root}")
        base_ty = self.contract.state_var(root).ty
        for i, link in enumerate(chain):
            if isinstance(link, A.Index):
                k = self.eval(link.index, p)
                if isinstance(base_ty, A.ArrayT):
                    if i != 0:
                        raise UnsupportedConstruct("nested array storage")
                    p.assume(T.cmp(">=", k, T.ZERO))
                    p.assume(T.cmp("<", k, p.state.array_length(root)))
                keys.append(k)
                parts.append("[]")
                base_ty = base_ty.value if isinstance(base_ty, A.MappingT) else base_ty.elem
            else:
                parts.append("." + link.field)
                base_ty = link.ty
        return ("state", root + "".join(parts), tuple(keys))

    def eval(self, e: A.Expr, p: _Path, checked: bool = True):
        match e:
            case A.Num(value):
                return T.const(value)
            case A.BoolLit(value):
                return TRUE if value else FALSE
            case A.AddrLit(index):
                return T.const(index)
            case A.MsgSender():
                return T.var("p.msg.sender", 0, ADDRESS_HI)
            case A.BlockNumber():
                return T.var("p.block.number", 0, self.contract.maxvalue)
            case A.Name(id):
                if id in p.env:
                    return p.env[id]
                decl = self.contract.state_var(id)
                if decl is None:
                    raise UnsupportedConstruct(f"unbound name {id}")
                if isinstance(decl.ty, (A.MappingT, A.ArrayT, A.StructT, A.StringT, A.BytesT)):
                    raise UnsupportedConstruct(f"{decl.ty} state variable {id} used as a value")
                return _from_cell(p.state.scalar(id, decl.ty), decl.ty)
            case A.Index() | A.Member():
                if isinstance(e.ty, (A.MappingT, A.ArrayT, A.StructT)):
                    raise UnsupportedConstruct(f"{e.ty} value")
                where = self.access(e, p)
                if where[0] == "param":
                    arr, idx = where[1], where[2]
                    lo, hi = value_bounds(arr.elem, self.contract)
                    return _from_cell(T.app(f"p.{arr.name}[]", (idx,), lo, hi), arr.elem)
                return _from_cell(p.state.read(where[1], where[2], e.ty), e.ty)
            case A.Length(A.Name(id)):
                v = p.env.get(id)
                if isinstance(v, ParamArray):
                    return v.length
                if v is None and self.contract.state_var(id) is not None:
                    return p.state.array_length(id)
                raise UnsupportedConstruct("length of a local")
            case A.BinOp("&&" | "||" as op, left, right):
                l = self.eval(left, p, checked)
                mark = len(p.pc)
                r = self.eval(right, p, checked)
                # side conditions of the right operand only matter when it is evaluated
                guard = l if op == "&&" else T.not_(l)
                p.pc[mark:] = [T.implies(guard, f) for f in p.pc[mark:]]
                return T.and_(l, r) if op == "&&" else T.or_(l, r)
            case A.BinOp(op, left, right):
                a = self.eval(left, p, checked)
                b = self.eval(right, p, checked)
                if op in A.COMPARE_OPS:
                    if not isinstance(a, Lin) or not isinstance(b, Lin):
                        a, b = _as_formula(a), _as_formula(b)
                        same = T.iff(a, b)
                        if op == "==":
                            return same
                        if op == "!=":
                            return T.not_(same)
                        raise UnsupportedConstruct("ordering on booleans")
                    return T.cmp(op, a, b)
                return self.arith(op, a, b, e.ty, p, checked)
            case A.UnOp("!", operand):
                return T.not_(self.eval(operand, p, checked))
            case A.UnOp("-", operand):
                return self.arith("-", T.ZERO, self.eval(operand, p, checked), e.ty, p, checked)
            case A.Unchecked(inner):
                return self.eval(inner, p, checked=False)
            case A.Cast(target, inner):
                v = self.eval(inner, p, checked)
                src = inner.ty
                if isinstance(target, A.AddressT) or isinstance(src, A.AddressT):
                    return v
                if A.is_integer(target) and type(target) is type(src):
                    return v
                raise UnsupportedConstruct(f"conversion from {src} to {target}")
        raise UnsupportedConstruct(f"expression {type(e).__name__}")

    # -- statements ----------------------------------------------------------

    def block(self, stmts, path: _Path) -> list[tuple[_Path, str]]:
        live, done = [path], []
        for s in stmts:
            nxt = []
            for p in live:
                for q, kind in self.stmt(s, p):
                    if q.dead:
                        continue
                    if kind == "normal":
                        nxt.append(q)
                    else:
                        done.append((q, kind))
            live = nxt
        return [(q, "normal") for q in live] + done

    def stmt(self, s: A.Stmt, p: _Path) -> list[tuple[_Path, str]]:
        for top in _immediate_exprs(s):
            for sub, guarded in _subexprs(top):
                if isinstance(sub, A.Call):
                    if guarded:
                        raise UnsupportedConstruct("call under a short-circuit operator")
                    return self.hoist(s, sub, p)
        match s:
            case A.LocalDecl(ty, name, init):
                if init is not None:
                    p.env[name] = self.eval(init, p)
                elif isinstance(ty, A.BoolT):
                    p.env[name] = FALSE
                elif A.is_integer(ty) or isinstance(ty, A.AddressT):
                    p.env[name] = T.ZERO
                else:
                    raise UnsupportedConstruct(f"local of type {ty}")
                return [(p, "normal")]
            case A.Assign(target, value):
                v = self.eval(value, p)
                self.store(target, v, p)
                return [(p, "normal")]
            case A.If(cond, then, orelse):
                c = self.eval(cond, p)
                out = []
                for lit, body in ((c, then), (T.not_(c), orelse)):
                    if lit is FALSE:
                        continue
                    q = p.fork() if c is not TRUE and c is not FALSE else p
                    q.assume(lit)
                    out.extend(self.block(body, q))
                return out
            case A.For(init, cond, update, body):
                starts = self.stmt(init, p) if init is not None else [(p, "normal")]
                return [r for q, _ in starts for r in self.loop(cond, update, body, q, 0)]
            case A.Require(cond):
                p.assume(self.eval(cond, p))
                return [(p, "normal")]
            case A.Assert(cond):
                c = self.eval(cond, p)
                self.assertions.append((tuple(p.pc), c, s.pos))
                p.assume(c)
                return [(p, "normal")]
            case A.Revert():
                return []
            case A.Return(value):
                p.ret = None if value is None else self.eval(value, p)
                return [(p, "return")]
            case A.ExprStmt():
                return [(p, "normal")]
        raise UnsupportedConstruct(f"statement {type(s).__name__}")

    def loop(self, cond, update, body, p: _Path, n: int) -> list[tuple[_Path, str]]:
        c = self.eval(cond, p)
        out = []
        if c is not TRUE:
            q = p.fork()
            q.assume(T.not_(c))
            if not q.dead:
                out.append((q, "normal"))
        if c is FALSE:
            return out
        p.assume(c)
        if n >= self.loop_bound:
            self.truncated.append(p)
            return out
        for q, kind in self.block(body, p):
            if kind != "normal":
                out.append((q, kind))
                continue
            if update is not None:
                self.stmt(update, q)
            if not q.dead:
                out.extend(self.loop(cond, update, body, q, n + 1))
        return out

    def hoist(self, s: A.Stmt, call: A.Call, p: _Path) -> list[tuple[_Path, str]]:
        """Inline an internal call, then continue with its result bound to a temporary."""
        f = self.contract.function(call.func)
        if f is None or self.depth >= INLINE_DEPTH:
            raise UnsupportedConstruct(f"call to {call.func}")
        values = [self.eval(a, p) for a in call.args]
        callee = p.fork()
        callee.env = {}
        for param, v in zip(f.params, values):
            callee.env[param.name] = v
        callee.ret = None
        self.depth += 1
        try:
            results = self.block(f.body, callee)
        finally:
            self.depth -= 1
        self.fresh += 1
        temp = A.Name(f"$call{self.fresh}", call.ty)
        rest = _map_immediate(s, call, temp)
        out = []
        for q, _ in results:
            value = q.ret
            q.env = dict(p.env)
            q.env[temp.id] = value
            q.ret = p.ret
            out.extend(self.stmt(rest, q))
        return out

    def store(self, target: A.Expr, v, p: _Path) -> None:
        match target:
            case A.Name(id):
                if id in p.env:
                    p.env[id] = v
                    return
                decl = self.contract.state_var(id)
                if decl is None or not (A.is_integer(decl.ty) or isinstance(decl.ty, (A.BoolT, A.AddressT))):
                    raise UnsupportedConstruct(f"assignment to {id}")
                p.state.set_scalar(id, _to_cell(v))
            case A.Index() | A.Member():
                if not (A.is_integer(target.ty) or isinstance(target.ty, (A.BoolT, A.AddressT))):
                    raise UnsupportedConstruct(f"assignment of a {target.ty} value")
                where = self.access(target, p)
                if where[0] != "state":
                    raise UnsupportedConstruct("assignment into a parameter array")
                p.state.write(where[1], where[2], _to_cell(v), target.ty)
            case _:
                raise UnsupportedConstruct("assignment target")


def _as_formula(v) -> Formula:
    return v if not isinstance(v, Lin) else T.int_to_bool(v)


# ---------------------------------------------------------------------------
# Specification predicates
# ---------------------------------------------------------------------------

class SpecTranslator:
    """Translate predicates over a (pre, post, params) symbolic environment."""

    def __init__(self, contract: A.ContractAst, params: dict[str, Any]):
        self.contract = contract
        self.params = params

    def predicate(self, p: S.Predicate, pre: SymState, post: SymState) -> Formula:
        match p:
            case S.Falsum():
                return FALSE
            case S.Atom(e):
                return _as_formula(self.expr(e, pre, post))
            case S.Implies(lhs, rhs):
                return T.implies(_as_formula(self.expr(lhs, pre, post)), _as_formula(self.expr(rhs, pre, post)))
        raise UnsupportedConstruct(f"predicate {p!r}")

    def _state(self, phase: str, pre: SymState, post: SymState) -> SymState:
        return pre if phase == S.PRE else post

    def access(self, e, pre, post):
        chain = []
        node = e
        while isinstance(node, (S.Index, S.Member)):
            chain.append(node)
            node = node.base
        chain.reverse()
        if not isinstance(node, S.Var):
            raise UnsupportedConstruct("access through a non-variable")
        if node.phase == S.PARAM:
            arr = self.params.get(node.name)
            if isinstance(arr, ParamArray) and len(chain) == 1 and isinstance(chain[0], S.Index):
                return ("param", arr, self.expr(chain[0].index, pre, post))
            raise UnsupportedConstruct("access into a parameter")
        parts, keys = [], []
        for link in chain:
            if isinstance(link, S.Index):
                keys.append(self.expr(link.index, pre, post))
                parts.append("[]")
            else:
                parts.append("." + link.field)
        return ("state", node.name + "".join(parts), tuple(keys), self._state(node.phase, pre, post))

    def expr(self, e: S.SpecExpr, pre: SymState, post: SymState):
        match e:
            case S.Const(value):
                if isinstance(value, bool):
                    return TRUE if value else FALSE
                return T.const(int(value))
            case S.Var(name, ty, phase):
                if phase == S.PARAM:
                    if name not in self.params:
                        raise UnsupportedConstruct(f"unbound parameter {name}")
                    return self.params[name]
                if isinstance(ty, (A.MappingT, A.ArrayT, A.StructT)):
                    raise UnsupportedConstruct(f"{ty} value")
                return _from_cell(self._state(phase, pre, post).scalar(name, ty), ty)
            case S.Index() | S.Member():
                where = self.access(e, pre, post)
                if where[0] == "param":
                    arr, idx = where[1], where[2]
                    lo, hi = value_bounds(arr.elem, self.contract)
                    return _from_cell(T.app(f"p.{arr.name}[]", (idx,), lo, hi), arr.elem)
                _, family, keys, st = where
                return _from_cell(st.read(family, keys, e.ty), e.ty)
            case S.Len(S.Var(name, ty, phase)):
                if phase == S.PARAM:
                    return self.params[name].length
                st = self._state(phase, pre, post)
                if isinstance(ty, A.MappingT) and A.mapping_depth(ty) == 1:
                    return st.count(name + "[]")
                if isinstance(ty, A.ArrayT):
                    return st.array_length(name)
                raise UnsupportedConstruct("len of a nested mapping")
            case S.SumMap(S.Var(name, ty, phase)) if A.mapping_depth(ty) == 1:
                return self._state(phase, pre, post).total(name + "[]", ty.value)
            case S.Binary(op, left, right):
                a = self.expr(left, pre, post)
                b = self.expr(right, pre, post)
                match op:
                    case "&&":
                        return T.and_(_as_formula(a), _as_formula(b))
                    case "||":
                        return T.or_(_as_formula(a), _as_formula(b))
                    case "+":
                        return T.add(a, b)
                    case "-":
                        return T.sub(a, b)
                    case "*":
                        return T.mul(a, b)
                    case "/":
                        return T.div(a, b)
                if not isinstance(a, Lin) or not isinstance(b, Lin):
                    same = T.iff(_as_formula(a), _as_formula(b))
                    return same if op == "==" else T.not_(same)
                return T.cmp(op, a, b)
        raise UnsupportedConstruct(f"specification expression {e!r}")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def entry_params(contract: A.ContractAst, f: A.FunctionDecl) -> dict[str, Any]:
    params: dict[str, Any] = {
        "msg.sender": T.var("p.msg.sender", 0, ADDRESS_HI),
        "block.number": T.var("p.block.number", 0, contract.maxvalue),
    }
    for prm in f.params:
        if isinstance(prm.ty, A.ArrayT):
            params[prm.name] = ParamArray(prm.name, prm.ty.elem)
        else:
            lo, hi = value_bounds(prm.ty, contract)
            params[prm.name] = _from_cell(T.var(f"p.{prm.name}", lo, hi), prm.ty)
    return params


def _relevant(a: Annotation, function: str, kinds: tuple[str, ...]) -> bool:
    scope = a.scope
    if scope.kind == S.CONTRACT:
        return S.CONTRACT in kinds
    return scope.kind in kinds and scope.function == function


def gen_vcs(contract: A.ContractAst, function: str, enabled: Iterable[Annotation],
            assumed: Iterable[Annotation] = (), loop_bound: int = 4) -> list[VerificationQuery]:
    """Queries for one function; enabled annotations are obligations, ``assumed`` are facts."""
    if loop_bound < 1:
        raise ValueError("loop bound must be at least 1")
    f = contract.function(function)
    if f is None:
        raise UnsupportedConstruct(f"unknown function {function}")
    enabled = list(enabled)
    assumed = list(assumed)
    params = entry_params(contract, f)
    entry = SymState(contract)
    ex = _Executor(contract, loop_bound)
    exits = ex.block(f.body, _Path([], entry.copy(), dict(params)))
    spec = SpecTranslator(contract, params)

    facts = [spec.predicate(a.predicate, entry, entry)
             for a in enabled + assumed if a.scope.kind == S.CONTRACT]
    facts += [spec.predicate(a.predicate, entry, entry)
              for a in assumed if _relevant(a, function, (S.REQUIRES,))]

    queries: list[VerificationQuery] = []

    def emit(path_id: int, base: list[Formula], obligation: Formula, source: Source, truncated: bool):
        body = [x for x in base if x is not TRUE]
        body += ghost_axioms(body + [obligation])
        queries.append(VerificationQuery(function, path_id, tuple(body), obligation, source, truncated))

    for pc, cond, pos in ex.assertions:
        emit(-1, facts + list(pc), cond, Source("assertion", pos), False)

    ends = [(q, False) for q, _ in exits] + [(q, True) for q in ex.truncated]
    for path_id, (q, truncated) in enumerate(ends):
        post = q.state
        after = [spec.predicate(a.predicate, entry, post)
                 for a in assumed if _relevant(a, function, (S.ENSURES,))]
        base = facts + q.pc + after
        for a in enabled:
            match a.scope.kind:
                case S.CONTRACT:
                    obl = spec.predicate(a.predicate, post, post)
                case S.ENSURES if a.scope.function == function:
                    obl = spec.predicate(a.predicate, entry, post)
                case S.REQUIRES if a.scope.function == function:
                    obl = spec.predicate(a.predicate, entry, entry)
                case _:
                    continue
            emit(path_id, base, obl, Source("candidate", a.id), truncated)
    return queries


def check_translatable(contract: A.ContractAst, a: Annotation) -> Optional[str]:
    """Why ``a`` cannot be expressed to the prover, or None when it can."""
    f = contract.function(a.scope.function) if a.scope.function else None
    params = entry_params(contract, f) if f is not None else {}
    try:
        SpecTranslator(contract, params).predicate(a.predicate, SymState(contract), SymState(contract, "'"))
    except UnsupportedConstruct as e:
        return f"out-of-fragment: {e}"
    return None
