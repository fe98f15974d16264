"""Three-valued evaluation of specification predicates over execution records."""

from __future__ import annotations

import enum
from functools import lru_cache
from typing import Any, Callable

from ..interp import ZERO, ExecutionRecord
from ..lang import ast as L
from .ast import (CONTRACT, PARAM, PRE, Atom, Binary, Const, Falsum, Implies, Index, Len, Member,
                  Predicate, Scope, SpecExpr, SpecStatement, SumMap, Var)


class Bool3(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDEFINED = "undefined"

    @classmethod
    def of(cls, b: bool) -> "Bool3":
        return cls.TRUE if b else cls.FALSE


class ScopeMismatch(Exception):
    pass


class Fault(Exception):
    """An evaluation fault inside a specification expression."""


_ABSENT = object()


def _default(ty: L.Type) -> Any:
    match ty:
        case L.UIntT() | L.IntT():
            return 0
        case L.BoolT():
            return False
        case L.AddressT():
            return ZERO
        case L.StringT() | L.BytesT():
            return ""
        case L.ArrayT():
            return []
        case L.MappingT():
            return {}
    return _ABSENT


Env = tuple[dict, dict, dict]  # (pre state, post state, parameters)


def _div(a: int, b: int) -> int:
    if b == 0:
        raise Fault("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


_BINOPS: dict[str, Callable[[Any, Any], Any]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _div,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    ">": lambda a, b: a > b,
    "<=": lambda a, b: a <= b,
    ">=": lambda a, b: a >= b,
    # both sides are always evaluated so any fault is reported (strict semantics)
    "&&": lambda a, b: a and b,
    "||": lambda a, b: a or b,
}


@lru_cache(maxsize=None)
def compile_expr(e: SpecExpr) -> Callable[[Env], Any]:
    """Turn an expression into a closure over (pre, post, params)."""
    match e:
        case Const(value):
            return lambda env: value
        case Var(name, _, phase):
            if phase == PARAM:
                def read_param(env):
                    try:
                        return env[2][name]
                    except KeyError:
                        raise Fault(f"unbound parameter {name}") from None
                return read_param
            slot = 0 if phase == PRE else 1
            return lambda env: env[slot][name]
        case Index(base, index, ty):
            fb, fi = compile_expr(base), compile_expr(index)
            default = _default(ty)

            def read_index(env):
                container = fb(env)
                key = fi(env)
                if isinstance(container, list):
                    if not 0 <= key < len(container):
                        raise Fault("array index out of bounds")
                    return container[key]
                return container.get(key, default)
            return read_index
        case Member(base, field, ty):
            fb = compile_expr(base)
            default = _default(ty)

            def read_member(env):
                v = fb(env)
                return default if v is _ABSENT else v[field]
            return read_member
        case Len(base):
            fb = compile_expr(base)
            return lambda env: len(fb(env))
        case SumMap(base):
            fb = compile_expr(base)
            return lambda env: sum(fb(env).values())
        case Binary(op, left, right):
            fl, fr, fn = compile_expr(left), compile_expr(right), _BINOPS[op]
            return lambda env: fn(fl(env), fr(env))
    raise TypeError(f"cannot evaluate {e!r}")


def params_of(record: ExecutionRecord) -> dict[str, Any]:
    params = dict(record.call.args)
    params["msg.sender"] = record.call.sender
    params["block.number"] = record.call.block_number
    return params


def _bool(f: Callable[[Env], Any], env: Env) -> Bool3:
    try:
        return Bool3.of(bool(f(env)))
    except Fault:
        return Bool3.UNDEFINED


@lru_cache(maxsize=None)
def compile_predicate(p: Predicate) -> Callable[[Env], Bool3]:
    match p:
        case Falsum():
            return lambda env: Bool3.FALSE
        case Atom(e):
            f = compile_expr(e)
            return lambda env: _bool(f, env)
        case Implies(lhs, rhs):
            fl, fr = compile_expr(lhs), compile_expr(rhs)

            def implies(env):
                try:
                    a, b = fl(env), fr(env)
                except Fault:
                    return Bool3.UNDEFINED
                return Bool3.of((not a) or bool(b))
            return implies
    raise TypeError(f"cannot evaluate {p!r}")


def eval_in(scope: Scope, p: Predicate, record: ExecutionRecord) -> Bool3:
    """Evaluate ``p`` under ``scope`` on one record."""
    f = compile_predicate(p)
    if scope.kind == CONTRACT:
        # a contract invariant must hold in both the entry and the exit state
        at_pre = f((record.pre, record.pre, {}))
        at_post = f((record.post, record.post, {}))
        if Bool3.UNDEFINED in (at_pre, at_post):
            return Bool3.UNDEFINED
        return Bool3.of(at_pre is Bool3.TRUE and at_post is Bool3.TRUE)
    if scope.function != record.call.function:
        raise ScopeMismatch(f"{scope} evaluated on a {record.call.function} record")
    return f((record.pre, record.post, params_of(record)))


def eval_state(p: Predicate, state: dict) -> Bool3:
    """Evaluate a contract-invariant body on a single state."""
    return compile_predicate(p)((state, state, {}))


def eval_predicate(stmt: SpecStatement, record: ExecutionRecord) -> Bool3:
    return eval_in(stmt.scope, stmt.body, record)
