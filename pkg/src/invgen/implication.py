"""Implication candidates: construction from primitive predicates and iterative weakening."""

from __future__ import annotations

from collections import defaultdict
from typing import Iterable, Optional

from .detect import Candidate
from .interp import ExecutionRecord
from .lang import ast as L
from .lang.deps import DependenceRelation
from .spec import ast as S
from .spec.evaluate import Fault, ScopeMismatch, compile_expr, params_of
from .spec.printer import print_expr
from .verify.backends import BackendConfig
from .verify.queries import CONTRADICTION, TAUTOLOGY, YES, classify_trivial, entails


def _entry_only(p: S.Predicate) -> bool:
    return isinstance(p, S.Atom) and S.POST not in S.phases(p)


def _update(p: S.Predicate) -> bool:
    return isinstance(p, S.Atom) and S.mentions_post(p)


def _function_of(c: Candidate) -> str:
    if c.scope.function is None:
        raise ScopeMismatch(f"{c.id} is not a function-scope candidate")
    return c.scope.function


def find_implications(unverified_likely: Iterable[Candidate], partial: Iterable[Candidate],
                      deps: DependenceRelation) -> list[Candidate]:
    """Pair entry-state premises with update consequences per function, keeping dependent pairs only."""
    pool: dict[str, list[Candidate]] = defaultdict(list)
    for c in list(unverified_likely) + list(partial):
        if c.scope.kind == S.CONTRACT:
            continue
        pool[_function_of(c)].append(c)
    out: dict[str, Candidate] = {}
    for fn in sorted(pool):
        cands = pool[fn]
        premises = sorted({print_expr(c.predicate.expr): c.predicate.expr
                           for c in cands if _entry_only(c.predicate)}.items())
        consequences = sorted({print_expr(c.predicate.expr): c.predicate.expr
                               for c in cands if _update(c.predicate)}.items())
        scope = S.Scope(S.ENSURES, fn)
        for _, eta in premises:
            va = S.variables(eta)
            for _, tau in consequences:
                if eta == tau:
                    continue
                vb = S.variables(tau)
                # Delete rule: the premise must be able to influence the consequence
                if not any(deps.dep(fn, a, b) for a in va for b in vb):
                    continue
                c = Candidate(scope, S.Implies(eta, tau), origin="implication")
                out.setdefault(c.id, c)
    return list(out.values())


# ---------------------------------------------------------------------------
# Weakening
# ---------------------------------------------------------------------------

def _canonical(parts: Iterable[S.SpecExpr], op: str) -> S.SpecExpr:
    unique = {print_expr(p): p for p in parts}
    ordered = [unique[k] for k in sorted(unique)]
    return S.conj(*ordered) if op == "&&" else S.disj(*ordered)


class Triviality:
    """Memoised tautology/contradiction and atom-entailment checks for one contract."""

    def __init__(self, contract: L.ContractAst, config: BackendConfig = BackendConfig()):
        self.contract = contract
        self.config = config
        self.memo: dict[tuple, str] = {}
        self.entail_memo: dict[tuple, bool] = {}

    def __call__(self, e: S.SpecExpr, scope: S.Scope) -> str:
        key = (scope, e)
        if key not in self.memo:
            self.memo[key] = classify_trivial(S.Atom(e), self.contract, scope, self.config)
        return self.memo[key]

    def entails(self, a: S.SpecExpr, b: S.SpecExpr, scope: S.Scope, screen: Optional["TraceScreen"] = None) -> bool:
        key = (scope, a, b)
        hit = self.entail_memo.get(key)
        if hit is None:
            if screen is not None and scope.function is not None:
                # a record where a holds and b fails settles it without the solver
                ta, _ = screen.masks(scope.function, a)
                _, fb = screen.masks(scope.function, b)
                if ta & fb:
                    self.entail_memo[key] = False
                    return False
            hit = entails(S.Atom(a), S.Atom(b), self.contract, scope, self.config).answer == YES
            self.entail_memo[key] = hit
        return hit


class Subsumption:
    """Syntactic entailment by verified invariants: fewer premises, or a consequence already among the disjuncts."""

    def __init__(self, verified: Iterable[Candidate] = ()):
        self.implications: dict[S.Scope, list[tuple[frozenset, frozenset]]] = defaultdict(list)
        self.facts: dict[S.Scope, set] = defaultdict(set)
        for v in verified:
            self.add(v)

    def add(self, v: Candidate) -> None:
        match v.predicate:
            case S.Implies(lhs, rhs):
                self.implications[v.scope].append((frozenset(S.flatten(lhs, "&&")), frozenset(S.flatten(rhs, "||"))))
            case S.Atom(e):
                self.facts[v.scope].add(e)

    def covers(self, scope: S.Scope, lhs: S.SpecExpr, rhs: S.SpecExpr) -> bool:
        prem, cons = set(S.flatten(lhs, "&&")), set(S.flatten(rhs, "||"))
        if cons & self.facts[scope]:
            return True
        return any(p <= prem and q <= cons for p, q in self.implications[scope])


def weaken_implications(unverified: Iterable[Candidate], contract: L.ContractAst,
                        seen: Optional[set[str]] = None, screen: Optional["TraceScreen"] = None,
                        trivial: Optional[Triviality] = None, verified: Iterable[Candidate] = (),
                        min_support: int = 1, evidence: bool = False) -> list[Candidate]:
    """Append-1 conjoins premises that share a consequence; Append-2 disjoins consequences that share a premise.

    Candidates already in ``seen`` (ids) are not produced again, and ``seen``
    is updated with every output. Outputs already implied by a ``verified``
    invariant are dropped, and with a ``screen`` so are outputs that some
    record refutes or whose premise holds on fewer than ``min_support`` records.
    With ``evidence`` only parents that some record refutes are combined, so
    every added conjunct or disjunct repairs an observed counterexample.
    """
    seen = seen if seen is not None else set()
    trivial = trivial or Triviality(contract)
    known = Subsumption(verified)
    failed = [c for c in unverified if isinstance(c.predicate, S.Implies)]
    for c in failed:
        seen.add(c.id)
    if evidence and screen is not None:
        failed = [c for c in failed if screen.refuted(c)]
    by_rhs: dict[tuple, list[Candidate]] = defaultdict(list)
    by_lhs: dict[tuple, list[Candidate]] = defaultdict(list)
    for c in sorted(failed, key=lambda c: c.id):
        by_rhs[(c.scope, c.predicate.rhs)].append(c)
        by_lhs[(c.scope, c.predicate.lhs)].append(c)
    out: dict[str, Candidate] = {}

    def offer(scope: S.Scope, lhs: S.SpecExpr, rhs: S.SpecExpr, degenerate: S.SpecExpr, verdict: str):
        c = Candidate(scope, S.Implies(lhs, rhs), origin="weakened")
        if c.id in seen or c.id in out:
            return
        if known.covers(scope, lhs, rhs):
            return
        # the trace screen is far cheaper than a solver triviality check
        if screen is not None and (screen.refuted(c) or screen.witnesses(c) < min_support):
            seen.add(c.id)
            return
        if trivial(degenerate, scope) == verdict:
            return
        out[c.id] = c

    def comparable(x: S.SpecExpr, y: S.SpecExpr, scope: S.Scope) -> bool:
        # then the combination collapses to a parent that was already tried
        return trivial.entails(x, y, scope, screen) or trivial.entails(y, x, scope, screen)

    for (scope, rhs), group in by_rhs.items():
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if comparable(a.predicate.lhs, b.predicate.lhs, scope):
                    continue
                lhs = _canonical(S.flatten(a.predicate.lhs, "&&") + S.flatten(b.predicate.lhs, "&&"), "&&")
                offer(scope, lhs, rhs, lhs, CONTRADICTION)
    for (scope, lhs), group in by_lhs.items():
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if comparable(a.predicate.rhs, b.predicate.rhs, scope):
                    continue
                rhs = _canonical(S.flatten(a.predicate.rhs, "||") + S.flatten(b.predicate.rhs, "||"), "||")
                offer(scope, lhs, rhs, rhs, TAUTOLOGY)
    seen.update(out)
    return list(out.values())


# ---------------------------------------------------------------------------
# Cheap refutation against the transaction history
# ---------------------------------------------------------------------------

class TraceScreen:
    """Truth/falsity bitmasks of predicates over each function's successful records."""

    def __init__(self, records: Iterable[ExecutionRecord]):
        self.records: dict[str, list[tuple]] = defaultdict(list)
        for r in records:
            if r.ok:
                self.records[r.call.function].append((r.pre, r.post, params_of(r)))
        self.memo: dict[tuple, tuple[int, int]] = {}

    def masks(self, function: str, e: S.SpecExpr) -> tuple[int, int]:
        key = (function, e)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if isinstance(e, S.Binary) and e.op in ("&&", "||"):
            tl, fl = self.masks(function, e.left)
            tr, fr = self.masks(function, e.right)
            res = (tl & tr, fl | fr) if e.op == "&&" else (tl | tr, fl & fr)
        else:
            f = compile_expr(e)
            t = fl = 0
            for i, env in enumerate(self.records.get(function, ())):
                try:
                    v = f(env)
                except Fault:
                    continue
                if v:
                    t |= 1 << i
                else:
                    fl |= 1 << i
            res = (t, fl)
        self.memo[key] = res
        return res

    def witnesses(self, c: Candidate) -> int:
        """Records of the function on which the premise (or the whole atom) holds."""
        e = c.predicate.lhs if isinstance(c.predicate, S.Implies) else c.predicate.expr
        return self.masks(c.scope.function, e)[0].bit_count()

    def refuted(self, c: Candidate) -> bool:
        """Some successful record of the function falsifies ``c``."""
        match c.predicate:
            case S.Implies(lhs, rhs):
                t_lhs, _ = self.masks(c.scope.function, lhs)
                _, f_rhs = self.masks(c.scope.function, rhs)
                return (t_lhs & f_rhs) != 0
            case S.Atom(e):
                return self.masks(c.scope.function, e)[1] != 0
        return False
