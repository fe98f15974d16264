"""Quantifier-free integer terms and formulas.

Every node carries a canonical string key ``sk`` used for hashing and
equality, so structurally equal nodes are interchangeable and cheap to
compare.  Integer terms are always linear combinations (``Lin``) over atoms:
variables, uninterpreted applications, if-then-else terms, nonlinear
products and integer divisions.  Formulas are kept in negation normal form;
``not_`` pushes negation down to comparisons.
"""

from __future__ import annotations

from math import gcd
from typing import Iterable, Optional, Union


class Node:
    __slots__ = ("sk",)

    def __eq__(self, other) -> bool:
        return self is other or (type(other) is type(self) and other.sk == self.sk)

    def __hash__(self) -> int:
        return hash(self.sk)

    def __repr__(self) -> str:
        return self.sk

    def __lt__(self, other) -> bool:
        return self.sk < other.sk


# ---------------------------------------------------------------------------
# Atoms
# ---------------------------------------------------------------------------

class Var(Node):
    __slots__ = ("name", "lo", "hi")
    __match_args__ = __slots__

    def __init__(self, name: str, lo: Optional[int] = None, hi: Optional[int] = None):
        self.name, self.lo, self.hi = name, lo, hi
        self.sk = name


class App(Node):
    """Uninterpreted function application (mapping/array base reads)."""
    __slots__ = ("fn", "args", "lo", "hi")
    __match_args__ = __slots__

    def __init__(self, fn: str, args: tuple["Lin", ...], lo: Optional[int] = None, hi: Optional[int] = None):
        self.fn, self.args, self.lo, self.hi = fn, args, lo, hi
        self.sk = f"{fn}[{','.join(a.sk for a in args)}]"


class Ite(Node):
    __slots__ = ("cond", "then", "other")
    __match_args__ = __slots__

    def __init__(self, cond: "Formula", then: "Lin", other: "Lin"):
        self.cond, self.then, self.other = cond, then, other
        self.sk = f"ite({cond.sk};{then.sk};{other.sk})"


class NMul(Node):
    __slots__ = ("a", "b")
    __match_args__ = __slots__

    def __init__(self, a: "Lin", b: "Lin"):
        if b.sk < a.sk:
            a, b = b, a
        self.a, self.b = a, b
        self.sk = f"({a.sk})*({b.sk})"


class IDiv(Node):
    """Division truncating toward zero; ``x div 0`` is 0."""
    __slots__ = ("a", "b")
    __match_args__ = __slots__

    def __init__(self, a: "Lin", b: "Lin"):
        self.a, self.b = a, b
        self.sk = f"({a.sk})/({b.sk})"


Atom = Union[Var, App, Ite, NMul, IDiv]


def bounds(atom: Atom) -> tuple[Optional[int], Optional[int]]:
    if isinstance(atom, (Var, App)):
        return atom.lo, atom.hi
    return None, None


# ---------------------------------------------------------------------------
# Linear terms
# ---------------------------------------------------------------------------

class Lin(Node):
    __slots__ = ("terms", "const")
    __match_args__ = __slots__

    def __init__(self, terms: tuple[tuple[Atom, int], ...], const: int):
        self.terms, self.const = terms, const
        if not terms:
            self.sk = str(const)
        else:
            body = "+".join(f"{c}{a.sk}" if c != 1 else a.sk for a, c in terms)
            self.sk = body if const == 0 else f"{body}+{const}"

    @property
    def is_const(self) -> bool:
        return not self.terms

    def coeff(self, atom: Atom) -> int:
        for a, c in self.terms:
            if a == atom:
                return c
        return 0

    def atoms(self) -> list[Atom]:
        return [a for a, _ in self.terms]


def _build(coeffs: dict, const: int) -> Lin:
    items = tuple(sorted(((a, c) for a, c in coeffs.items() if c), key=lambda t: t[0].sk))
    return Lin(items, const)


def const(v: int) -> Lin:
    return Lin((), int(v))


ZERO, ONE = const(0), const(1)


def atom(a: Atom) -> Lin:
    return Lin(((a, 1),), 0)


def var(name: str, lo: Optional[int] = None, hi: Optional[int] = None) -> Lin:
    return atom(Var(name, lo, hi))


def app(fn: str, args: Iterable[Lin], lo: Optional[int] = None, hi: Optional[int] = None) -> Lin:
    return atom(App(fn, tuple(args), lo, hi))


def add(*ls: Lin) -> Lin:
    if len(ls) == 1:
        return ls[0]
    coeffs: dict = {}
    c = 0
    for l in ls:
        c += l.const
        for a, k in l.terms:
            coeffs[a] = coeffs.get(a, 0) + k
    return _build(coeffs, c)


def scale(l: Lin, k: int) -> Lin:
    if k == 1:
        return l
    if k == 0:
        return ZERO
    return Lin(tuple((a, c * k) for a, c in l.terms), l.const * k)


def neg(l: Lin) -> Lin:
    return scale(l, -1)


def sub(a: Lin, b: Lin) -> Lin:
    return add(a, neg(b))


def mul(a: Lin, b: Lin) -> Lin:
    if a.is_const:
        return scale(b, a.const)
    if b.is_const:
        return scale(a, b.const)
    return atom(NMul(a, b))


def tdiv(a: int, b: int) -> int:
    if b == 0:
        return 0
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def div(a: Lin, b: Lin) -> Lin:
    if b.is_const:
        if b.const == 1:
            return a
        if a.is_const:
            return const(tdiv(a.const, b.const))
        if b.const == -1:
            return neg(a)
    return atom(IDiv(a, b))


def ite(c: "Formula", a: Lin, b: Lin) -> Lin:
    if c is TRUE:
        return a
    if c is FALSE:
        return b
    if a == b:
        return a
    return atom(Ite(c, a, b))


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

class BoolConst(Node):
    __slots__ = ("value",)
    __match_args__ = __slots__

    def __init__(self, value: bool):
        self.value = value
        self.sk = "true" if value else "false"


TRUE, FALSE = BoolConst(True), BoolConst(False)


class Cmp(Node):
    """``lin op 0`` with op one of ``<=``, ``==``, ``!=``."""
    __slots__ = ("op", "lin")
    __match_args__ = __slots__

    def __init__(self, op: str, lin: Lin):
        self.op, self.lin = op, lin
        self.sk = f"{lin.sk}{op}0"


class And(Node):
    __slots__ = ("args",)
    __match_args__ = __slots__

    def __init__(self, args: tuple["Formula", ...]):
        self.args = args
        self.sk = "and(" + ";".join(a.sk for a in args) + ")"


class Or(Node):
    __slots__ = ("args",)
    __match_args__ = __slots__

    def __init__(self, args: tuple["Formula", ...]):
        self.args = args
        self.sk = "or(" + ";".join(a.sk for a in args) + ")"


Formula = Union[BoolConst, Cmp, And, Or]


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _normalize(op: str, l: Lin) -> Formula:
    if l.is_const:
        v = l.const
        return TRUE if {"<=": v <= 0, "==": v == 0, "!=": v != 0}[op] else FALSE
    g = 0
    for _, c in l.terms:
        g = gcd(g, c)
    if op == "<=":
        if g > 1:
            l = Lin(tuple((a, c // g) for a, c in l.terms), _ceil_div(l.const, g))
        if len(l.terms) == 1:
            a, c = l.terms[0]
            lo, hi = bounds(a)
            # c*a + k <= 0 under lo <= a <= hi
            k = l.const
            best = (c * lo if lo is not None else None) if c > 0 else (c * hi if hi is not None else None)
            worst = (c * hi if hi is not None else None) if c > 0 else (c * lo if lo is not None else None)
            if best is not None and best + k > 0:
                return FALSE
            if worst is not None and worst + k <= 0:
                return TRUE
        return Cmp("<=", l)
    if l.const % g:
        return FALSE if op == "==" else TRUE
    if g > 1:
        l = Lin(tuple((a, c // g) for a, c in l.terms), l.const // g)
    if l.terms[0][1] < 0:
        l = neg(l)
    if len(l.terms) == 1:
        a, c = l.terms[0]
        lo, hi = bounds(a)
        if c == 1:
            v = -l.const
            if (lo is not None and v < lo) or (hi is not None and v > hi):
                return FALSE if op == "==" else TRUE
    return Cmp(op, l)


def cmp(op: str, a: Lin, b: Lin) -> Formula:
    match op:
        case "<=":
            return _normalize("<=", sub(a, b))
        case "<":
            return _normalize("<=", add(sub(a, b), ONE))
        case ">=":
            return _normalize("<=", sub(b, a))
        case ">":
            return _normalize("<=", add(sub(b, a), ONE))
        case "==" | "!=":
            return _normalize(op, sub(a, b))
    raise ValueError(op)


def eq(a: Lin, b: Lin) -> Formula:
    return cmp("==", a, b)


def not_(f: Formula) -> Formula:
    match f:
        case BoolConst():
            return FALSE if f.value else TRUE
        case Cmp("<=", l):
            return _normalize("<=", add(neg(l), ONE))
        case Cmp("==", l):
            return Cmp("!=", l)
        case Cmp("!=", l):
            return Cmp("==", l)
        case And(args):
            return or_(*(not_(a) for a in args))
        case Or(args):
            return and_(*(not_(a) for a in args))
    raise TypeError(f)


def and_(*fs: Formula) -> Formula:
    out: dict[str, Formula] = {}
    for f in fs:
        parts = f.args if isinstance(f, And) else (f,)
        for p in parts:
            if p is FALSE:
                return FALSE
            if p is TRUE:
                continue
            out[p.sk] = p
    if not out:
        return TRUE
    for p in out.values():
        if isinstance(p, Cmp) and not_(p).sk in out:
            return FALSE
    if len(out) == 1:
        return next(iter(out.values()))
    return And(tuple(out[k] for k in sorted(out)))


def or_(*fs: Formula) -> Formula:
    out: dict[str, Formula] = {}
    for f in fs:
        parts = f.args if isinstance(f, Or) else (f,)
        for p in parts:
            if p is TRUE:
                return TRUE
            if p is FALSE:
                continue
            out[p.sk] = p
    if not out:
        return FALSE
    for p in out.values():
        if isinstance(p, Cmp) and not_(p).sk in out:
            return TRUE
    if len(out) == 1:
        return next(iter(out.values()))
    return Or(tuple(out[k] for k in sorted(out)))


def implies(a: Formula, b: Formula) -> Formula:
    return or_(not_(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return and_(implies(a, b), implies(b, a))


def bool_to_int(f: Formula) -> Lin:
    if isinstance(f, Cmp) and f.op == "==" and len(f.lin.terms) == 1:
        a, c = f.lin.terms[0]
        if c == 1 and f.lin.const == -1 and bounds(a) == (0, 1):
            return atom(a)
    return ite(f, ONE, ZERO)


def int_to_bool(t: Lin) -> Formula:
    if len(t.terms) == 1 and t.const == 0 and t.terms[0][1] == 1:
        a = t.terms[0][0]
        if isinstance(a, Ite) and a.then == ONE and a.other == ZERO:
            return a.cond
    return cmp("==", t, ONE)


# ---------------------------------------------------------------------------
# Traversal
# ---------------------------------------------------------------------------

def atoms_of(node: Union[Lin, Formula], deep: bool = True) -> list[Atom]:
    """Atoms in deterministic first-occurrence order."""
    seen: dict[str, Atom] = {}

    def visit_lin(l: Lin):
        for a, _ in l.terms:
            visit_atom(a)

    def visit_atom(a: Atom):
        if a.sk in seen:
            return
        if deep:
            match a:
                case App(_, args):
                    for x in args:
                        visit_lin(x)
                case Ite(c, t, e):
                    visit_f(c)
                    visit_lin(t)
                    visit_lin(e)
                case NMul(x, y) | IDiv(x, y):
                    visit_lin(x)
                    visit_lin(y)
        seen[a.sk] = a

    def visit_f(f: Formula):
        match f:
            case Cmp(_, l):
                visit_lin(l)
            case And(args) | Or(args):
                for x in args:
                    visit_f(x)

    if isinstance(node, Lin):
        visit_lin(node)
    else:
        visit_f(node)
    return list(seen.values())


class Rewriter:
    """Bottom-up rebuild with replacement hooks and memoisation."""

    def __init__(self, atom_map: Optional[dict[str, Lin]] = None,
                 formula_map: Optional[dict[str, Formula]] = None):
        self.atom_map = atom_map or {}
        self.formula_map = formula_map or {}
        self.memo: dict[str, object] = {}

    def lin(self, l: Lin) -> Lin:
        hit = self.memo.get(l.sk)
        if hit is not None:
            return hit
        parts = [const(l.const)]
        changed = False
        for a, c in l.terms:
            r = self.atom(a)
            if r is not None:
                changed = True
                parts.append(scale(r, c))
            else:
                parts.append(Lin(((a, c),), 0))
        out = add(*parts) if changed else l
        self.memo[l.sk] = out
        return out

    def atom(self, a: Atom) -> Optional[Lin]:
        """Replacement for ``a`` or None when unchanged."""
        key = "@" + a.sk
        if key in self.memo:
            return self.memo[key]
        out: Optional[Lin] = self.atom_map.get(a.sk)
        if out is None:
            match a:
                case App(fn, args, lo, hi):
                    new_args = tuple(self.lin(x) for x in args)
                    if any(x is not y for x, y in zip(new_args, args)):
                        out = app(fn, new_args, lo, hi)
                case Ite(c, t, e):
                    nc, nt, ne = self.formula(c), self.lin(t), self.lin(e)
                    if nc is not c or nt is not t or ne is not e:
                        out = ite(nc, nt, ne)
                case NMul(x, y):
                    nx, ny = self.lin(x), self.lin(y)
                    if nx is not x or ny is not y:
                        out = mul(nx, ny)
                case IDiv(x, y):
                    nx, ny = self.lin(x), self.lin(y)
                    if nx is not x or ny is not y:
                        out = div(nx, ny)
        self.memo[key] = out
        return out

    def formula(self, f: Formula) -> Formula:
        hit = self.memo.get(f.sk)
        if hit is not None:
            return hit
        out = self.formula_map.get(f.sk)
        if out is None:
            match f:
                case BoolConst():
                    out = f
                case Cmp(op, l):
                    nl = self.lin(l)
                    out = f if nl is l else _normalize(op, nl)
                case And(args):
                    new = [self.formula(x) for x in args]
                    out = f if all(x is y for x, y in zip(new, args)) else and_(*new)
                case Or(args):
                    new = [self.formula(x) for x in args]
                    out = f if all(x is y for x, y in zip(new, args)) else or_(*new)
        self.memo[f.sk] = out
        return out


def substitute(node, atom_map: dict[str, Lin]):
    rw = Rewriter(atom_map=atom_map)
    return rw.lin(node) if isinstance(node, Lin) else rw.formula(node)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

class Model:
    """Values for variables and uninterpreted function tables."""

    def __init__(self, values: Optional[dict[str, int]] = None,
                 tables: Optional[dict[tuple[str, tuple[int, ...]], int]] = None):
        self.values = dict(values or {})
        self.tables = dict(tables or {})

    def lin(self, l: Lin) -> int:
        return l.const + sum(c * self.atom(a) for a, c in l.terms)

    def atom(self, a: Atom) -> int:
        match a:
            case Var(name, lo, _):
                return self.values.get(name, lo if lo is not None else 0)
            case App(fn, args, lo, _):
                key = (fn, tuple(self.lin(x) for x in args))
                return self.tables.get(key, lo if lo is not None else 0)
            case Ite(c, t, e):
                return self.lin(t) if self.formula(c) else self.lin(e)
            case NMul(x, y):
                return self.lin(x) * self.lin(y)
            case IDiv(x, y):
                return tdiv(self.lin(x), self.lin(y))
        raise TypeError(a)

    def formula(self, f: Formula) -> bool:
        match f:
            case BoolConst(value=v):
                return v
            case Cmp("<=", l):
                return self.lin(l) <= 0
            case Cmp("==", l):
                return self.lin(l) == 0
            case Cmp("!=", l):
                return self.lin(l) != 0
            case And(args):
                return all(self.formula(x) for x in args)
            case Or(args):
                return any(self.formula(x) for x in args)
        raise TypeError(f)

    def as_dict(self) -> dict[str, int]:
        out = dict(self.values)
        for (fn, args), v in self.tables.items():
            out[f"{fn}[{','.join(map(str, args))}]"] = v
        return out
