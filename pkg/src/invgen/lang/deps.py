"""Data- and control-dependence between variables of each function.

``a`` depends on ``b`` when ``b`` flows (transitively, through locals) into a
definition of ``a``, or when ``a`` is defined at a point whose execution is
decided by a condition reading ``b``.  A condition decides every later
statement of its block when one of its branches may leave the function
(``return``/``revert``), which covers the early-return guard idiom, and
``require`` conditions decide everything after them.  The relation returned
is the reflexive, symmetric closure.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from . import ast as A

SENDER = "msg.sender"
BLOCK = "block.number"


@dataclass
class DependenceRelation:
    pairs: dict[str, frozenset[tuple[str, str]]] = field(default_factory=dict)
    universe: dict[str, frozenset[str]] = field(default_factory=dict)

    def dep(self, function: str, a: str, b: str) -> bool:
        if a == b:
            return True
        return (a, b) in self.pairs.get(function, frozenset())

    def for_function(self, function: str) -> frozenset[tuple[str, str]]:
        return self.pairs.get(function, frozenset())


def expr_vars(e: A.Expr | None) -> set[str]:
    """Names read by an expression (roots of accesses plus index variables)."""
    out: set[str] = set()
    if e is None:
        return out
    for sub in A.iter_exprs(e):
        match sub:
            case A.Name(id):
                out.add(id)
            case A.MsgSender():
                out.add(SENDER)
            case A.BlockNumber():
                out.add(BLOCK)
    return out


def _target_parts(target: A.Expr) -> tuple[str, set[str]]:
    """Defined variable and the variables used to locate the definition."""
    name = A.root_name(target)
    located: set[str] = set()
    e = target
    while isinstance(e, (A.Index, A.Member)):
        if isinstance(e, A.Index):
            located |= expr_vars(e.index)
        e = e.base
    return name, located


def _may_exit(stmts) -> bool:
    for s in stmts:
        match s:
            case A.Return() | A.Revert():
                return True
            case A.If(_, then, orelse):
                if _may_exit(then) or _may_exit(orelse):
                    return True
            case A.For(_, _, _, body):
                if _may_exit(body):
                    return True
    return False


class _Analysis:
    def __init__(self, contract: A.ContractAst):
        self.contract = contract
        self.flows: dict[str, set[str]] = defaultdict(set)
        self.changed = False
        self.call_stack: list[str] = []

    def add(self, a: str, srcs: set[str]) -> None:
        new = set(srcs)
        for s in srcs:
            new |= self.flows.get(s, set())
        new.discard(a)
        if not new <= self.flows[a]:
            self.flows[a] |= new
            self.changed = True

    def resolve(self, names: set[str], alias: dict[str, set[str]]) -> set[str]:
        out: set[str] = set()
        for n in names:
            out |= alias.get(n, {n})
        return out

    def block(self, stmts, control: set[str], alias: dict[str, set[str]]) -> None:
        control = set(control)
        for s in stmts:
            match s:
                case A.LocalDecl(_, name, init):
                    self.define(name, set(), expr_vars(init), control, alias)
                    self.calls(init, control, alias)
                case A.Assign(target, value):
                    name, located = _target_parts(target)
                    self.define(name, located, expr_vars(value), control, alias)
                    self.calls(value, control, alias)
                case A.If(cond, then, orelse):
                    cvars = self.resolve(expr_vars(cond), alias)
                    self.calls(cond, control, alias)
                    self.block(then, control | cvars, alias)
                    self.block(orelse, control | cvars, alias)
                    if _may_exit(then) or _may_exit(orelse):
                        control |= cvars
                case A.For(init, cond, update, body):
                    if init is not None:
                        self.block((init,), control, alias)
                    cvars = self.resolve(expr_vars(cond), alias)
                    inner = control | cvars
                    for _ in range(2):
                        self.block(body, inner, alias)
                        if update is not None:
                            self.block((update,), inner, alias)
                    if _may_exit(body):
                        control |= cvars
                case A.Require(cond):
                    self.calls(cond, control, alias)
                    control |= self.resolve(expr_vars(cond), alias)
                case A.Assert(cond):
                    self.calls(cond, control, alias)
                case A.Return(value):
                    self.calls(value, control, alias)
                case A.ExprStmt(call):
                    self.calls(call, control, alias)

    def define(self, name: str, located: set[str], reads: set[str], control: set[str],
               alias: dict[str, set[str]]) -> None:
        targets = alias.get(name, {name})
        srcs = self.resolve(reads | located, alias) | control
        for t in targets:
            self.add(t, srcs)

    def calls(self, e: A.Expr | None, control: set[str], alias: dict[str, set[str]]) -> None:
        if e is None:
            return
        for sub in A.iter_exprs(e):
            if isinstance(sub, A.Call):
                callee = self.contract.function(sub.func)
                if callee is None or sub.func in self.call_stack:
                    continue
                inner = {}
                for p, arg in zip(callee.params, sub.args):
                    inner[p.name] = self.resolve(expr_vars(arg), alias)
                self.call_stack.append(sub.func)
                self.block(callee.body, control, inner)
                self.call_stack.pop()


def function_universe(contract: A.ContractAst, f: A.FunctionDecl) -> frozenset[str]:
    names = {v.name for v in contract.state_vars}
    names |= {p.name for p in f.params}
    names |= {SENDER, BLOCK}
    return frozenset(names)


def compute_deps(contract: A.ContractAst) -> DependenceRelation:
    rel = DependenceRelation()
    funcs = list(contract.functions)
    if contract.constructor is not None:
        funcs.append(contract.constructor)
    for f in funcs:
        an = _Analysis(contract)
        an.call_stack.append(f.name)
        an.changed = True
        while an.changed:
            an.changed = False
            an.block(f.body, set(), {})
        universe = function_universe(contract, f)
        pairs: set[tuple[str, str]] = {(v, v) for v in universe}
        for a, srcs in an.flows.items():
            for b in srcs:
                if a in universe and b in universe:
                    pairs.add((a, b))
                    pairs.add((b, a))
        rel.pairs[f.name] = frozenset(pairs)
        rel.universe[f.name] = universe
    return rel
