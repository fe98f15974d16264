"""Big-step interpreter for mini contracts and a seeded call generator."""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field
from typing import Any, Optional

from .lang import ast as A

ITERATION_LIMIT = 10_000


class InterpError(Exception):
    """Ill-typed input reached the interpreter."""


class Address(int):
    """Small-domain account identifier; ``Address(0)`` is the zero address."""

    def __repr__(self) -> str:
        return f"a{int(self)}"

    __str__ = __repr__

    @classmethod
    def parse(cls, text: str) -> "Address":
        if len(text) < 2 or text[0] != "a" or not text[1:].isdigit():
            raise ValueError(f"not an address: {text!r}")
        return cls(int(text[1:]))


ZERO = Address(0)

ContractState = dict[str, Any]


@dataclass(frozen=True)
class Call:
    function: str
    args: dict[str, Any]
    sender: Address
    block_number: int = 0

    def __hash__(self) -> int:
        return hash((self.function, self.sender, self.block_number))


@dataclass
class ExecutionRecord:
    tx_id: int
    pre: ContractState
    call: Call
    post: ContractState
    status: str  # "success" | "reverted"
    # not part of the serialized trace, so excluded from equality
    return_value: Any = field(default=None, compare=False)
    assertion_failure: bool = field(default=False, compare=False)
    reason: str = field(default="", compare=False)

    @property
    def ok(self) -> bool:
        return self.status == "success"


TraceSet = list[ExecutionRecord]


def successful(traces: TraceSet) -> TraceSet:
    return [r for r in traces if r.ok]


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

def default_value(ty: A.Type, contract: A.ContractAst) -> Any:
    match ty:
        case A.UIntT() | A.IntT():
            return 0
        case A.BoolT():
            return False
        case A.AddressT():
            return ZERO
        case A.StringT() | A.BytesT():
            return ""
        case A.ArrayT():
            return []
        case A.MappingT():
            return {}
        case A.StructT(name):
            decl = contract.struct(name)
            return {f.name: default_value(f.ty, contract) for f in decl.fields}
    raise InterpError(f"no default for {ty}")


def is_default(value: Any, ty: A.Type, contract: A.ContractAst) -> bool:
    return value == default_value(ty, contract)


def check_value(value: Any, ty: A.Type, contract: A.ContractAst) -> bool:
    """Whether ``value`` is a well-typed, canonical inhabitant of ``ty``."""
    match ty:
        case A.UIntT():
            return type(value) is int and 0 <= value <= contract.maxvalue
        case A.IntT():
            half = 1 << (contract.width - 1)
            return type(value) is int and -half <= value < half
        case A.BoolT():
            return type(value) is bool
        case A.AddressT():
            return isinstance(value, Address)
        case A.StringT() | A.BytesT():
            return isinstance(value, str)
        case A.ArrayT(elem):
            return isinstance(value, list) and all(check_value(v, elem, contract) for v in value)
        case A.MappingT(key, val):
            if not isinstance(value, dict):
                return False
            return all(check_value(k, key, contract) and check_value(v, val, contract)
                       and not is_default(v, val, contract) for k, v in value.items())
        case A.StructT(name):
            decl = contract.struct(name)
            return (isinstance(value, dict) and set(value) == {f.name for f in decl.fields}
                    and all(check_value(value[f.name], f.ty, contract) for f in decl.fields))
    return False


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

class _Revert(Exception):
    def __init__(self, reason: str, assertion: bool = False):
        super().__init__(reason)
        self.reason = reason
        self.assertion = assertion


class _Return(Exception):
    def __init__(self, value: Any):
        self.value = value


class _Machine:
    def __init__(self, contract: A.ContractAst, state: ContractState, sender: Address, block: int):
        self.contract = contract
        self.state = state
        self.sender = sender
        self.block_number = block
        self.types = {v.name: v.ty for v in contract.state_vars}
        self.iterations = 0

    # -- arithmetic ----------------------------------------------------------

    def bounds(self, ty: A.Type) -> tuple[int, int]:
        if isinstance(ty, A.IntT):
            half = 1 << (self.contract.width - 1)
            return -half, half - 1
        return 0, self.contract.maxvalue

    def wrap(self, v: int, ty: A.Type) -> int:
        lo, _ = self.bounds(ty)
        return (v - lo) % (1 << self.contract.width) + lo

    def arith(self, op: str, a: int, b: int, ty: A.Type, checked: bool) -> int:
        match op:
            case "+":
                r = a + b
            case "-":
                r = a - b
            case "*":
                r = a * b
            case "/":
                if b == 0:
                    raise _Revert("division by zero")
                q = abs(a) // abs(b)
                r = q if (a >= 0) == (b >= 0) else -q
            case _:
                raise InterpError(f"unknown operator {op}")
        lo, hi = self.bounds(ty)
        if lo <= r <= hi:
            return r
        if checked:
            raise _Revert(f"arithmetic overflow in {op}")
        return self.wrap(r, ty)

    # -- expressions ---------------------------------------------------------

    def eval(self, e: A.Expr, env: dict[str, Any], checked: bool = True) -> Any:
        match e:
            case A.Num(value):
                return value
            case A.BoolLit(value):
                return value
            case A.AddrLit(index):
                return Address(index)
            case A.StrLit(value):
                return value
            case A.MsgSender():
                return self.sender
            case A.BlockNumber():
                return self.block_number
            case A.Name(id):
                if id in env:
                    return env[id]
                if id in self.state:
                    return self.state[id]
                raise InterpError(f"unbound name {id}")
            case A.Index(base, index):
                container = self.eval(base, env, checked)
                key = self.eval(index, env, checked)
                if isinstance(container, list):
                    if not 0 <= key < len(container):
                        raise _Revert("array index out of bounds")
                    return container[key]
                if key in container:
                    return container[key]
                return default_value(base.ty.value, self.contract)
            case A.Member(base, field):
                return self.eval(base, env, checked)[field]
            case A.Length(base):
                return len(self.eval(base, env, checked))
            case A.BinOp("&&", left, right):
                return self.eval(left, env, checked) and self.eval(right, env, checked)
            case A.BinOp("||", left, right):
                return self.eval(left, env, checked) or self.eval(right, env, checked)
            case A.BinOp(op, left, right):
                a = self.eval(left, env, checked)
                b = self.eval(right, env, checked)
                match op:
                    case "==":
                        return a == b
                    case "!=":
                        return a != b
                    case "<":
                        return a < b
                    case ">":
                        return a > b
                    case "<=":
                        return a <= b
                    case ">=":
                        return a >= b
                return self.arith(op, a, b, e.ty, checked)
            case A.UnOp("!", operand):
                return not self.eval(operand, env, checked)
            case A.UnOp("-", operand):
                return self.arith("-", 0, self.eval(operand, env, checked), e.ty, checked)
            case A.Unchecked(inner):
                return self.eval(inner, env, checked=False)
            case A.Cast(target, inner):
                v = self.eval(inner, env, checked)
                if isinstance(target, A.AddressT):
                    return Address(v)
                return self.wrap(int(v), target)
            case A.Call(func, args):
                values = [self.eval(a, env, checked) for a in args]
                return self.invoke(self.contract.function(func), values)
        raise InterpError(f"cannot evaluate {type(e).__name__}")

    # -- statements ----------------------------------------------------------

    def invoke(self, f: A.FunctionDecl, values: list[Any]) -> Any:
        env = {p.name: v for p, v in zip(f.params, values)}
        try:
            self.block(f.body, env)
        except _Return as r:
            return r.value
        return None

    def block(self, stmts, env: dict[str, Any]) -> None:
        for s in stmts:
            self.stmt(s, env)

    def stmt(self, s: A.Stmt, env: dict[str, Any]) -> None:
        match s:
            case A.LocalDecl(ty, name, init):
                env[name] = default_value(ty, self.contract) if init is None else copy.deepcopy(self.eval(init, env))
            case A.Assign(target, value):
                self.assign(target, copy.deepcopy(self.eval(value, env)), env)
            case A.If(cond, then, orelse):
                self.block(then if self.eval(cond, env) else orelse, env)
            case A.For(init, cond, update, body):
                if init is not None:
                    self.stmt(init, env)
                while self.eval(cond, env):
                    self.iterations += 1
                    if self.iterations > ITERATION_LIMIT:
                        raise _Revert("iteration limit exceeded")
                    self.block(body, env)
                    if update is not None:
                        self.stmt(update, env)
            case A.Require(cond):
                if not self.eval(cond, env):
                    raise _Revert("require failed")
            case A.Assert(cond):
                if not self.eval(cond, env):
                    raise _Revert("assertion failed", assertion=True)
            case A.Revert():
                raise _Revert("revert")
            case A.Return(value):
                raise _Return(None if value is None else self.eval(value, env))
            case A.ExprStmt(call):
                self.eval(call, env)
            case _:
                raise InterpError(f"cannot execute {type(s).__name__}")

    def assign(self, target: A.Expr, value: Any, env: dict[str, Any]) -> None:
        path: list[tuple[str, Any, A.Type]] = []
        e = target
        while isinstance(e, (A.Index, A.Member)):
            if isinstance(e, A.Index):
                path.append(("index", self.eval(e.index, env), e.base.ty))
            else:
                path.append(("field", e.field, e.base.ty))
            e = e.base
        name = e.id
        path.reverse()
        if name in env:
            env[name] = self._store(env[name], path, value)
        else:
            self.state[name] = self._store(self.state[name], path, value)

    def _store(self, container: Any, path, value: Any) -> Any:
        if not path:
            return value
        (kind, key, ty), rest = path[0], path[1:]
        if kind == "field":
            container[key] = self._store(container[key], rest, value)
            return container
        if isinstance(ty, A.ArrayT):
            if not 0 <= key < len(container):
                raise _Revert("array index out of bounds")
            container[key] = self._store(container[key], rest, value)
            return container
        inner_ty = ty.value
        current = container.get(key, default_value(inner_ty, self.contract))
        new = self._store(current, rest, value)
        if is_default(new, inner_ty, self.contract):
            container.pop(key, None)
        else:
            container[key] = new
        return container


def _check_call(contract: A.ContractAst, call: Call) -> A.FunctionDecl:
    f = contract.function(call.function)
    if f is None or not f.is_public:
        raise InterpError(f"no public function {call.function!r}")
    names = [p.name for p in f.params]
    if sorted(call.args) != sorted(names):
        raise InterpError(f"{call.function} expects arguments {names}, got {sorted(call.args)}")
    for p in f.params:
        if not check_value(call.args[p.name], p.ty, contract):
            raise InterpError(f"argument {p.name!r} is not a {p.ty}")
    if not isinstance(call.sender, Address):
        raise InterpError("call sender must be an address")
    return f


def execute_call(contract: A.ContractAst, state: ContractState, call: Call, tx_id: int = 0) -> ExecutionRecord:
    f = _check_call(contract, call)
    work = copy.deepcopy(state)
    m = _Machine(contract, work, call.sender, call.block_number)
    try:
        ret = m.invoke(f, [copy.deepcopy(call.args[p.name]) for p in f.params])
    except _Revert as r:
        return ExecutionRecord(tx_id, state, call, state, "reverted", None, r.assertion, r.reason)
    return ExecutionRecord(tx_id, state, call, work, "success", ret)


def initial_state(contract: A.ContractAst, deployer: Address = Address(1)) -> ContractState:
    """Declared defaults and initializers, then the constructor body."""
    state = {v.name: default_value(v.ty, contract) for v in contract.state_vars}
    m = _Machine(contract, state, deployer, 0)
    for v in contract.state_vars:
        if v.init is not None:
            state[v.name] = m.eval(v.init, {})
    if contract.constructor is not None:
        if contract.constructor.params:
            raise InterpError("constructors with parameters are not supported")
        try:
            m.invoke(contract.constructor, [])
        except _Revert as r:
            raise InterpError(f"constructor reverted: {r.reason}") from None
    return state


def replay_history(contract: A.ContractAst, init: ContractState, calls: list[Call]) -> TraceSet:
    records = []
    state = init
    for i, call in enumerate(calls):
        rec = execute_call(contract, state, call, tx_id=i)
        records.append(rec)
        state = rec.post
    return records


# ---------------------------------------------------------------------------
# History generation
# ---------------------------------------------------------------------------

@dataclass
class _ArgSampler:
    contract: A.ContractAst
    rng: random.Random
    addresses: int
    pool: list[int] = field(default_factory=list)

    def refresh(self, state: ContractState) -> None:
        numbers: set[int] = set()

        def walk(v):
            if isinstance(v, bool) or isinstance(v, Address):
                return
            if isinstance(v, int):
                numbers.add(v)
            elif isinstance(v, dict):
                for x in v.values():
                    walk(x)
            elif isinstance(v, list):
                for x in v:
                    walk(x)

        for v in state.values():
            walk(v)
        self.pool = sorted(n for n in numbers if n > 0)

    def address(self, chosen: list[Address]) -> Address:
        r = self.rng.random()
        if r < 0.15:
            return ZERO
        if chosen and r < 0.35:
            return self.rng.choice(chosen)
        return Address(self.rng.randint(1, self.addresses))

    def uint(self) -> int:
        r = self.rng.random()
        if r < 0.1:
            return 0
        if r < 0.55:
            return self.rng.randint(1, 10)
        if r < 0.85 and self.pool:
            return self.rng.randint(0, self.rng.choice(self.pool))
        if r < 0.97:
            return self.rng.randint(0, 1000)
        return self.contract.maxvalue

    def value(self, ty: A.Type, chosen: list[Address]) -> Any:
        match ty:
            case A.AddressT():
                return self.address(chosen)
            case A.UIntT():
                return self.uint()
            case A.IntT():
                return self.rng.randint(-10, 10)
            case A.BoolT():
                return self.rng.random() < 0.5
            case A.StringT() | A.BytesT():
                return self.rng.choice(["", "x", "token"])
            case A.ArrayT(elem):
                return [self.value(elem, chosen) for _ in range(self.rng.randint(0, 3))]
        raise InterpError(f"cannot generate arguments of type {ty}")

    def call(self, f: A.FunctionDecl, block: int) -> Call:
        chosen: list[Address] = []
        args = {}
        for p in f.params:
            v = self.value(p.ty, chosen)
            if isinstance(v, Address):
                chosen.append(v)
            args[p.name] = v
        sender = Address(self.rng.randint(1, self.addresses))
        return Call(f.name, args, sender, block)


def generate_history(contract: A.ContractAst, n: int, seed: int, addresses: int = 4,
                     init: Optional[ContractState] = None, attempts: int = 8) -> list[Call]:
    """Seeded call sequence over all public functions.

    Calls are sampled against a simulated state; most of the time the
    generator keeps the first of several samples that succeeds, so every
    function gathers successful executions while reverting calls still occur.
    """
    functions = contract.public_functions
    if n <= 0 or not functions:
        return []
    rng = random.Random(seed)
    sampler = _ArgSampler(contract, rng, addresses)
    state = initial_state(contract) if init is None else init
    calls: list[Call] = []
    for i in range(n):
        sampler.refresh(state)
        f = functions[rng.randrange(len(functions))]
        call = sampler.call(f, i + 1)
        rec = execute_call(contract, state, call)
        if not rec.ok and rng.random() < 0.8:
            for _ in range(attempts):
                alt = sampler.call(f, i + 1)
                alt_rec = execute_call(contract, state, alt)
                if alt_rec.ok:
                    call, rec = alt, alt_rec
                    break
        calls.append(call)
        state = rec.post
    return calls
