"""Mutation testing: how many single-node program faults the inferred invariants catch."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field, fields, replace
from typing import Iterator, Optional, Sequence, get_args

from .detect import Candidate
from .interp import Call, initial_state, replay_history
from .lang import ast as A
from .lang.errors import ContractError
from .lang.typecheck import check_contract
from .pipeline import Violation, check_trace
from .spec import ast as S
from .verify.backends import BackendConfig
from .verify.queries import YES, entails

OPERATORS = (
    "binary-op-replacement",
    "unary-op-replacement",
    "require-condition-negation",
    "require-deletion",
    "assignment-rhs-constant-replacement",
    "statement-deletion",
)

SWAP = {"+": "-", "-": "+", "*": "/", "/": "*", "<": "<=", "<=": "<", ">": ">=", ">=": ">",
        "==": "!=", "!=": "==", "&&": "||", "||": "&&"}


@dataclass(frozen=True)
class Mutant:
    operator: str
    function: str
    location: str
    description: str
    contract: A.ContractAst = field(repr=False, compare=False)

    @property
    def id(self) -> str:
        return f"{self.operator}@{self.function}:{self.location}"


# ---------------------------------------------------------------------------
# Mutant generation
# ---------------------------------------------------------------------------

def _where(node) -> str:
    line, col = getattr(node, "pos", (0, 0))
    return f"{line}:{col}"


EXPR_TYPES = get_args(A.Expr)


def _children(e: A.Expr) -> list[str]:
    return [f.name for f in fields(e)
            if f.name != "pos" and isinstance(getattr(e, f.name), (*EXPR_TYPES, tuple))]


def _expr_mutations(e: A.Expr) -> Iterator[tuple[str, A.Expr, str, A.Expr]]:
    """(operator, site, description, replacement) for every mutable node under ``e``."""
    match e:
        case A.BinOp(op, _, _) if op in SWAP:
            yield "binary-op-replacement", e, f"{op} -> {SWAP[op]}", replace(e, op=SWAP[op])
        case A.UnOp(op, operand):
            yield "unary-op-replacement", e, f"drop unary {op}", operand
    for name in _children(e):
        child = getattr(e, name)
        if isinstance(child, tuple):
            for i, arg in enumerate(child):
                for op, site, desc, new in _expr_mutations(arg):
                    args = child[:i] + (new,) + child[i + 1:]
                    yield op, site, desc, replace(e, **{name: args})
        else:
            for op, site, desc, new in _expr_mutations(child):
                yield op, site, desc, replace(e, **{name: new})


def _constant_like(value: A.Expr, ty: Optional[A.Type]) -> Optional[A.Expr]:
    match ty:
        case A.UIntT() | A.IntT():
            return A.Num(1 if isinstance(value, A.Num) and value.value == 0 else 0, ty, value.pos)
        case A.BoolT():
            flip = isinstance(value, A.BoolLit) and not value.value
            return A.BoolLit(flip, ty, value.pos)
        case A.AddressT():
            return A.AddrLit(1 if isinstance(value, A.AddrLit) and value.index == 0 else 0, ty, value.pos)
    return None


_EXPR_SLOTS = {A.LocalDecl: ("init",), A.Assign: ("value",), A.If: ("cond",), A.For: ("cond",),
               A.Require: ("cond",), A.Assert: ("cond",), A.Return: ("value",), A.ExprStmt: ("expr",)}


def _stmt_mutations(stmts: tuple) -> Iterator[tuple[str, object, str, tuple]]:
    """(operator, site, description, new statement list) for every mutation inside ``stmts``."""
    for i, s in enumerate(stmts):
        def put(new: Optional[A.Stmt]) -> tuple:
            return stmts[:i] + ((new,) if new is not None else ()) + stmts[i + 1:]

        match s:
            case A.Require(cond):
                yield "require-condition-negation", s, "negate require", put(replace(s, cond=A.UnOp("!", cond, A.BoolT(), cond.pos)))
                yield "require-deletion", s, "delete require", put(None)
            case A.If(cond):
                # a guard that returns early acts as a precondition check
                yield "require-condition-negation", s, "negate guard", put(replace(s, cond=A.UnOp("!", cond, A.BoolT(), cond.pos)))
            case A.Assign(target, value):
                new = _constant_like(value, target.ty or value.ty)
                if new is not None and new != value:
                    yield "assignment-rhs-constant-replacement", s, "constant rhs", put(replace(s, value=new))
                yield "statement-deletion", s, "delete assignment", put(None)
            case A.ExprStmt():
                yield "statement-deletion", s, "delete call", put(None)
        for slot in _EXPR_SLOTS.get(type(s), ()):
            e = getattr(s, slot)
            if e is not None:
                for op, site, desc, new in _expr_mutations(e):
                    yield op, site, desc, put(replace(s, **{slot: new}))
        match s:
            case A.If(_, then, orelse):
                for op, site, desc, new in _stmt_mutations(then):
                    yield op, site, desc, put(replace(s, then=new))
                for op, site, desc, new in _stmt_mutations(orelse):
                    yield op, site, desc, put(replace(s, orelse=new))
            case A.For(body=body):
                for op, site, desc, new in _stmt_mutations(body):
                    yield op, site, desc, put(replace(s, body=new))


def generate_mutants(contract: A.ContractAst) -> list[Mutant]:
    """One mutant per (operator, site) over every function body; the constructor is left intact."""
    out = []
    for fi, f in enumerate(contract.functions):
        for op, site, desc, body in _stmt_mutations(f.body):
            funcs = contract.functions[:fi] + (replace(f, body=body),) + contract.functions[fi + 1:]
            out.append(Mutant(op, f.name, _where(site), desc, replace(contract, functions=funcs)))
    return out


# ---------------------------------------------------------------------------
# Kill analysis
# ---------------------------------------------------------------------------

@dataclass
class MutantOutcome:
    id: str
    operator: str
    function: str
    location: str
    description: str
    status: str  # killed | survived | skipped
    killed_by: list[str] = field(default_factory=list)
    assertion: bool = False
    categories: list[str] = field(default_factory=list)


@dataclass
class MutationReport:
    outcomes: list[MutantOutcome]

    @property
    def total(self) -> int:
        return sum(o.status != "skipped" for o in self.outcomes)

    @property
    def killed(self) -> int:
        return sum(o.status == "killed" for o in self.outcomes)

    @property
    def skipped(self) -> int:
        return sum(o.status == "skipped" for o in self.outcomes)

    @property
    def kill_rate(self) -> float:
        return self.killed / self.total if self.total else 0.0

    def by_operator(self) -> dict[str, dict[str, int]]:
        out = {op: {"total": 0, "killed": 0} for op in OPERATORS}
        for o in self.outcomes:
            if o.status != "skipped":
                out[o.operator]["total"] += 1
                out[o.operator]["killed"] += o.status == "killed"
        return out

    def categories(self) -> dict[str, int]:
        return dict(Counter(c for o in self.outcomes for c in o.categories))

    def get(self, mutant_id: str) -> Optional[MutantOutcome]:
        return next((o for o in self.outcomes if o.id == mutant_id), None)

    def to_json(self) -> dict:
        return {
            "total": self.total, "killed": self.killed, "skipped": self.skipped, "kill_rate": self.kill_rate,
            "by_operator": self.by_operator(), "categories": self.categories(),
            "mutants": [asdict(o) for o in self.outcomes],
        }


class _Categorizer:
    """Scope and ground-truth expressibility of killing invariants."""

    def __init__(self, contract: A.ContractAst, ground_truth: Sequence[S.SpecStatement], config: BackendConfig):
        self.contract = contract
        self.truth = list(ground_truth)
        self.config = config
        self.memo: dict[str, bool] = {}

    def expressible(self, inv: Candidate) -> bool:
        if inv.id not in self.memo:
            premises = [g.body for g in self.truth if g.scope == inv.scope]
            if inv.scope.kind == S.ENSURES:
                premises += [g.body for g in self.truth
                             if g.scope == S.Scope(S.REQUIRES, inv.scope.function) and isinstance(g.body, S.Atom)]
            self.memo[inv.id] = bool(premises) and entails(premises, inv.predicate, self.contract, inv.scope,
                                                           self.config).answer == YES
        return self.memo[inv.id]

    def __call__(self, inv: Candidate) -> list[str]:
        out = ["contract-inv" if inv.scope.kind == S.CONTRACT else "pre/post"]
        if self.truth:
            out.append("ground-truth" if self.expressible(inv) else "beyond-ground-truth")
        return out


def mutation_test(contract: A.ContractAst, invs: Sequence[Candidate], history: Sequence[Call],
                  ground_truth: Sequence[S.SpecStatement] = (),
                  config: BackendConfig = BackendConfig()) -> MutationReport:
    """Replay ``history`` on every mutant; a mutant dies when an invariant or assertion fails."""
    by_id = {c.id: c for c in invs}
    categorize = _Categorizer(contract, ground_truth, config)
    outcomes = []
    for m in generate_mutants(contract):
        o = MutantOutcome(m.id, m.operator, m.function, m.location, m.description, "survived")
        outcomes.append(o)
        try:
            mutant = check_contract(m.contract)
            records = replay_history(mutant, initial_state(mutant), list(history))
        except ContractError:
            o.status = "skipped"
            continue
        violations: list[Violation] = check_trace(invs, records)
        o.assertion = any(r.assertion_failure for r in records)
        if violations or o.assertion:
            o.status = "killed"
            o.killed_by = sorted({v.invariant for v in violations})
            o.categories = sorted({c for i in o.killed_by for c in categorize(by_id[i])})
    return MutationReport(outcomes)


__all__ = ["Mutant", "MutantOutcome", "MutationReport", "OPERATORS", "generate_mutants", "mutation_test"]
