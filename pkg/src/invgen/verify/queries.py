"""Logical questions about specification predicates: entailment and triviality."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..lang import ast as A
from ..spec import ast as S
from . import logic as T
from .backends import PROVED, REFUTED, BackendConfig, check_formulas
from .vcgen import SpecTranslator, SymState, UnsupportedConstruct, entry_params, ghost_axioms

YES, NO, UNKNOWN = "yes", "no", "unknown"
TAUTOLOGY, CONTRADICTION, NEITHER = "tautology", "contradiction", "neither"


@dataclass(frozen=True)
class Verdict:
    answer: str
    counterexample: Optional[dict] = field(default=None, compare=False)

    def __bool__(self) -> bool:
        return self.answer == YES


class Translator:
    """Shared symbolic environment for predicates of a single scope."""

    def __init__(self, contract: A.ContractAst, scope: S.Scope):
        self.contract = contract
        self.scope = scope
        f = contract.function(scope.function) if scope.function else None
        params = entry_params(contract, f) if f is not None else {}
        self.spec = SpecTranslator(contract, params)
        self.pre = SymState(contract)
        self.post = SymState(contract, "'")

    def formula(self, p: S.Predicate) -> T.Formula:
        if self.scope.kind == S.CONTRACT:
            return self.spec.predicate(p, self.post, self.post)
        if self.scope.kind == S.REQUIRES:
            return self.spec.predicate(p, self.pre, self.pre)
        return self.spec.predicate(p, self.pre, self.post)


def _check(formulas: list[T.Formula], config: BackendConfig) -> tuple[str, Optional[dict]]:
    formulas = formulas + ghost_axioms(formulas)
    res = check_formulas(formulas, config)
    if res.status == PROVED:
        return "unsat", None
    if res.status == REFUTED:
        return "sat", res.model
    return "unknown", None


def entails(premises: S.Predicate | Iterable[S.Predicate], goal: S.Predicate, contract: A.ContractAst,
            scope: S.Scope, config: BackendConfig = BackendConfig()) -> Verdict:
    """Whether the conjunction of ``premises`` implies ``goal`` for every valuation in ``scope``."""
    if not isinstance(premises, (list, tuple, set, frozenset)):
        premises = [premises]
    tr = Translator(contract, scope)
    try:
        fs = [tr.formula(p) for p in premises]
        fs.append(T.not_(tr.formula(goal)))
    except UnsupportedConstruct:
        return Verdict(UNKNOWN)
    status, model = _check(fs, config)
    if status == "unsat":
        return Verdict(YES)
    if status == "sat":
        return Verdict(NO, model)
    return Verdict(UNKNOWN)


def classify_trivial(p: S.Predicate, contract: A.ContractAst, scope: S.Scope,
                     config: BackendConfig = BackendConfig()) -> str:
    """``tautology``, ``contradiction`` or ``neither``; an undecided query counts as ``neither``."""
    tr = Translator(contract, scope)
    try:
        f = tr.formula(p)
    except UnsupportedConstruct:
        return NEITHER
    if f is T.TRUE:
        return TAUTOLOGY
    if f is T.FALSE:
        return CONTRADICTION
    neg, _ = _check([T.not_(f)], config)
    if neg == "unsat":
        return TAUTOLOGY
    pos, _ = _check([f], config)
    if pos == "unsat":
        return CONTRADICTION
    return NEITHER


def equivalent(a: Iterable[S.Predicate], b: Iterable[S.Predicate], contract: A.ContractAst, scope: S.Scope,
               config: BackendConfig = BackendConfig()) -> bool:
    """Conjunctions of ``a`` and ``b`` are interchangeable (each entails every member of the other)."""
    a, b = list(a), list(b)
    return (all(entails(a, g, contract, scope, config) for g in b)
            and all(entails(b, g, contract, scope, config) for g in a))
