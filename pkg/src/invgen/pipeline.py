"""End-to-end invariant inference, evaluation against ground truth, and runtime checking."""

from __future__ import annotations

import re
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .detect import (LIKELY, PARTIAL, REFUTED, UNDETERMINED, VERIFIED, Candidate, CandidatePool, EmptyTrace,
                     detect, initialize_candidates)
from .implication import TraceScreen, Triviality, find_implications, weaken_implications
from .interp import ExecutionRecord, initial_state, successful
from .lang import ast as L
from .lang.deps import compute_deps
from .spec import ast as S
from .spec.evaluate import Bool3, ScopeMismatch, eval_in
from .spec.parser import SpecError, SpecScopeError, parse_statement
from .spec.printer import print_statement
from .suppress import suppress
from .verify.backends import BackendConfig
from .verify.houdini import QueryCache, static_infer
from .verify.queries import YES, entails


@dataclass(frozen=True)
class Config:
    min_support: int = 3
    max_weaken_iters: int = 4
    backend: BackendConfig = BackendConfig()
    width: Optional[int] = None
    addresses: int = 4
    seed: int = 0
    screen_traces: bool = True
    evidence_weakening: bool = True

    def __post_init__(self):
        if self.min_support < 1:
            raise ValueError("min_support must be at least 1")
        if self.max_weaken_iters < 1:
            raise ValueError("max_weaken_iters must be at least 1")


@dataclass
class Stage:
    name: str
    candidates: list[str]
    verified: list[str]


@dataclass
class InferenceResult:
    invariants: list[Candidate]
    verified: list[Candidate]
    pool: CandidatePool
    likely: list[Candidate]
    partial: list[Candidate]
    stages: list[Stage] = field(default_factory=list)
    iterations: int = 0

    @property
    def primitive_count(self) -> int:
        return len(self.likely) + len(self.partial)

    def to_spec(self) -> str:
        return "".join(print_statement(c.statement()) + "\n" for c in self.invariants)


def _mark(cands: Iterable[Candidate], status: str) -> None:
    for c in cands:
        c.status = status


def infer_from_pool(contract: L.ContractAst, traces: Sequence[ExecutionRecord], likely: list[Candidate],
                    partial: list[Candidate], config: Config = Config(),
                    pool: Optional[CandidatePool] = None) -> InferenceResult:
    """Verification, implication and weakening stages on an already classified pool."""
    cache = QueryCache()
    init = initial_state(contract)
    result = InferenceResult([], [], pool or CandidatePool(likely + partial), likely, partial)

    first = static_infer(contract, likely, (), config.backend, init, cache=cache)
    invs: list[Candidate] = list(first.verified)
    _mark(first.verified, VERIFIED)
    _mark(first.refuted, REFUTED)
    _mark(first.undetermined, UNDETERMINED)
    result.stages.append(Stage("primitive", [c.id for c in likely], [c.id for c in first.verified]))

    verified_ids = {c.id for c in invs}
    leftovers = [c for c in likely if c.id not in verified_ids]
    deps = compute_deps(contract)
    screen = TraceScreen(traces) if config.screen_traces else None
    trivial = Triviality(contract, config.backend)
    candidates = find_implications(leftovers, partial, deps)
    seen = {c.id for c in candidates}
    n = 0
    while candidates:
        if screen is not None:
            failed = [c for c in candidates if screen.refuted(c)]
            bad = {c.id for c in failed}
            alive = [c for c in candidates if c.id not in bad]
        else:
            failed, alive = [], candidates
        step = static_infer(contract, alive, invs, config.backend, init, cache=cache)
        _mark(failed + step.refuted, REFUTED)
        _mark(step.undetermined, UNDETERMINED)
        _mark(step.verified, VERIFIED)
        invs.extend(step.verified)
        result.stages.append(Stage(f"implication-{n}", [c.id for c in candidates], [c.id for c in step.verified]))
        unverified = failed + step.refuted + step.undetermined
        if n >= config.max_weaken_iters or not unverified:
            break
        candidates = weaken_implications(unverified, contract, seen, screen, trivial, invs,
                                         config.min_support, config.evidence_weakening)
        candidates = _relevant_premises(contract, candidates, invs, config, init, cache, screen)
        n += 1
    result.iterations = n
    result.verified = invs
    result.invariants = suppress(invs, contract, config.backend)
    return result


def _relevant_premises(contract: L.ContractAst, candidates: list[Candidate], invs: list[Candidate],
                       config: Config, init, cache: QueryCache, screen: Optional[TraceScreen]) -> list[Candidate]:
    """Drop implications whose consequence holds for the function whatever the premise.

    Each distinct consequence is verified once as an unconditional postcondition;
    the implications it would make redundant are never sent to the verifier.
    """
    groups: dict[tuple, list[Candidate]] = {}
    for c in candidates:
        groups.setdefault((c.scope, c.predicate.rhs), []).append(c)
    probes = [Candidate(scope, S.Atom(rhs)) for scope, rhs in groups
              if screen is None or not screen.masks(scope.function, rhs)[1]]
    if not probes:
        return candidates
    res = static_infer(contract, probes, invs, config.backend, init, cache=cache)
    valid = {(p.scope, p.predicate.expr) for p in res.verified}
    return [c for c in candidates if (c.scope, c.predicate.rhs) not in valid]


def run_inference(contract: L.ContractAst, traces: Sequence[ExecutionRecord], config: Config = Config()) -> InferenceResult:
    """Detect, verify, build and weaken implications, then suppress redundant invariants."""
    ok = successful(list(traces))
    if not ok:
        raise EmptyTrace("no successful records in the transaction history")
    pool = initialize_candidates(contract, ok)
    likely, partial = detect(ok, pool, config.min_support)
    return infer_from_pool(contract, ok, likely, partial, config, pool)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

@dataclass
class EvalReport:
    X: list[str]
    X_proved: list[str]
    Y: list[str]
    Y_restricted: list[str]
    recovered: list[str]
    missed: list[str]
    precision: float = 0.0
    recall_adjusted: float = 0.0

    def __post_init__(self):
        self.precision, self.recall_adjusted = metrics(len(self.X), len(self.X_proved),
                                                       len(self.recovered), len(self.Y_restricted))

    def to_json(self) -> dict:
        return asdict(self)


def metrics(n_x: int, n_proved: int, n_matched: int, n_restricted: int) -> tuple[float, float]:
    """Precision |X_proved|/|X| and adjusted recall |X_proved ∩ Y| / |Y restricted to observed functions|."""
    precision = n_proved / n_x if n_x else 1.0
    recall = n_matched / n_restricted if n_restricted else 0.0
    return precision, recall


def _label(stmt: S.SpecStatement) -> str:
    return stmt.label or print_statement(stmt)


def _premise_sets(produced: list[S.Predicate], given: list[S.Predicate]):
    """Growing premise subsets; a subset that entails the goal settles it, and small ones are cheap to decide."""
    for p in produced:
        yield [p] + given
    yield [p for p in produced if not _disjunctive(p)] + given
    yield produced + given


def _disjunctive(p: S.Predicate) -> bool:
    match p:
        case S.Implies(_, rhs) | S.Atom(rhs):
            return isinstance(rhs, S.Binary) and rhs.op == "||"
    return False


def _entailed_by(premises: list[S.Predicate], g: S.SpecStatement, contract: L.ContractAst,
                 config: BackendConfig) -> bool:
    return entails(premises, g.body, contract, g.scope, config).answer == YES


def evaluate(invs: Sequence[Candidate], ground_truth: Sequence[S.SpecStatement], traces: Sequence[ExecutionRecord],
             contract: L.ContractAst, config: BackendConfig = BackendConfig()) -> EvalReport:
    for g in ground_truth:
        if g.scope.function is not None and contract.function(g.scope.function) is None:
            raise SpecScopeError(f"ground truth refers to unknown function {g.scope.function!r}")
    observed = {r.call.function for r in successful(list(traces))}
    restricted = [g for g in ground_truth if g.scope.kind == S.CONTRACT or g.scope.function in observed]
    proved = [c for c in invs if c.status == VERIFIED]
    recovered, missed = [], []
    for g in restricted:
        produced = [c.predicate for c in proved if c.scope == g.scope]
        if g.scope.kind == S.ENSURES:
            given = [r.body for r in ground_truth
                     if r.scope == S.Scope(S.REQUIRES, g.scope.function) and isinstance(r.body, S.Atom)]
            hit = any(_entailed_by(premises, g, contract, config) for premises in _premise_sets(produced, given))
        else:
            hit = any(_entailed_by([p], g, contract, config) for p in produced)
        (recovered if hit else missed).append(_label(g))
    return EvalReport(
        X=[c.id for c in invs],
        X_proved=[c.id for c in proved],
        Y=[_label(g) for g in ground_truth],
        Y_restricted=[_label(g) for g in restricted],
        recovered=recovered,
        missed=missed,
    )


# ---------------------------------------------------------------------------
# Runtime enforcement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    tx_id: int
    invariant: str


def check_trace(invs: Iterable[Candidate | S.SpecStatement], traces: Iterable[ExecutionRecord],
                contract_only: bool = False) -> list[Violation]:
    """Every (record, invariant) pair where a successful record falsifies an invariant."""
    items = []
    for inv in invs:
        scope = inv.scope
        body = inv.predicate if isinstance(inv, Candidate) else inv.body
        name = inv.id if isinstance(inv, Candidate) else _label(inv)
        if contract_only and scope.kind != S.CONTRACT:
            raise ScopeMismatch(f"{name} is not a contract invariant")
        items.append((scope, body, name))
    out = []
    for r in traces:
        if not r.ok:
            continue
        for scope, body, name in items:
            if scope.kind != S.CONTRACT and scope.function != r.call.function:
                continue
            if eval_in(scope, body, r) is Bool3.FALSE:
                out.append(Violation(r.tx_id, name))
    return out


def candidates_from_spec(statements: Iterable[S.SpecStatement], status: str = VERIFIED) -> list[Candidate]:
    return [Candidate(s.scope, s.body, status=status) for s in statements]


_IDENT = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")


def union_invariants(runs: Iterable[tuple[Sequence[Candidate], Mapping[str, str]]],
                     contract: L.ContractAst) -> list[Candidate]:
    """Pool invariants inferred on related contracts, in the vocabulary of ``contract``.

    Each run carries an alias map from its own state variable and function
    names to those of ``contract``. Statements that still do not fit
    ``contract`` after renaming are dropped; duplicates are kept once.
    """
    out: dict[str, Candidate] = {}
    for invs, alias in runs:
        for c in invs:
            text = _IDENT.sub(lambda m: alias.get(m[0], m[0]), c.id)
            try:
                s = parse_statement(text, contract)
            except SpecError:
                continue
            merged = Candidate(s.scope, s.body, status=c.status, origin=c.origin)
            out.setdefault(merged.id, merged)
    return list(out.values())


__all__ = [
    "Config", "EvalReport", "InferenceResult", "Stage", "Violation", "candidates_from_spec", "check_trace",
    "evaluate", "infer_from_pool", "metrics", "run_inference", "union_invariants", "LIKELY", "PARTIAL",
]
