"""Houdini-style inference: the largest subset of candidates that is jointly inductive."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..interp import initial_state
from ..lang import ast as A
from ..spec import ast as S
from ..spec.evaluate import Bool3, eval_state
from .backends import PROVED, REFUTED, UNKNOWN, BackendConfig, ProofResult, discharge
from .vcgen import Annotation, UnsupportedConstruct, VerificationQuery, check_translatable, gen_vcs


class AssertionViolation(Exception):
    def __init__(self, query: VerificationQuery, result: ProofResult):
        super().__init__(f"{query.function}: {query.source} can fail (counterexample {result.model})")
        self.query = query
        self.result = result


@dataclass
class HoudiniResult:
    verified: list = field(default_factory=list)
    refuted: list = field(default_factory=list)
    undetermined: list = field(default_factory=list)
    reasons: dict = field(default_factory=dict)
    rounds: int = 0
    queries: int = 0


class QueryCache:
    """Memoised discharge keyed by the structure of the query and the backend settings."""

    def __init__(self):
        self.results: dict[tuple, ProofResult] = {}
        self.hits = 0

    def discharge(self, query: VerificationQuery, config: BackendConfig) -> ProofResult:
        key = (query.key, config)
        hit = self.results.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        res = discharge(query, config)
        self.results[key] = res
        return res


def _relevant(a: Annotation, function: str) -> bool:
    return a.scope.kind == S.CONTRACT or a.scope.function == function


def modular_verify(contract: A.ContractAst, enabled: Sequence[Annotation], assumed: Sequence[Annotation],
                   config: BackendConfig, cache: Optional[QueryCache] = None) -> tuple[dict[str, ProofResult], int]:
    """Verify every public function in isolation; returns the weakest result per annotation id.

    Raises AssertionViolation when an ``assert`` in the contract can fail.
    """
    cache = cache or QueryCache()
    worst: dict[str, ProofResult] = {a.id: ProofResult(PROVED) for a in enabled}
    rank = {PROVED: 0, UNKNOWN: 1, REFUTED: 2}
    count = 0
    for f in contract.public_functions:
        try:
            queries = gen_vcs(contract, f.name, enabled, assumed, config.loop_bound)
        except UnsupportedConstruct as e:
            for a in enabled:
                if _relevant(a, f.name) and worst[a.id].status == PROVED:
                    worst[a.id] = ProofResult(UNKNOWN, reason=f"out-of-fragment: {e}")
            continue
        for q in queries:
            count += 1
            res = cache.discharge(q, config)
            if q.source.kind == "assertion":
                if res.status == REFUTED:
                    raise AssertionViolation(q, res)
                continue
            cid = q.source.ref
            if rank[res.status] > rank[worst[cid].status]:
                worst[cid] = res
    return worst, count


def static_infer(contract: A.ContractAst, candidates: Iterable[Annotation], assumptions: Iterable[Annotation] = (),
                 config: BackendConfig = BackendConfig(), init_state: Optional[dict] = None,
                 order_seed: Optional[int] = None, cache: Optional[QueryCache] = None) -> HoudiniResult:
    """Houdini fixpoint over ``candidates`` with already-verified ``assumptions`` taken as facts.

    By default every failing candidate is disabled per round.  With ``order_seed``
    a single failing candidate, chosen at random, is disabled per round instead.
    """
    cache = cache or QueryCache()
    out = HoudiniResult()
    seen: set[str] = set()
    enabled: list[Annotation] = []
    for c in candidates:
        if c.id not in seen:
            seen.add(c.id)
            enabled.append(c)
    assumed = list(assumptions)
    rng = random.Random(order_seed) if order_seed is not None else None

    def drop(c: Annotation, res: ProofResult):
        (out.refuted if res.status == REFUTED else out.undetermined).append(c)
        out.reasons[c.id] = res.reason or res.status

    # contract invariants must already hold after construction
    if any(c.scope.kind == S.CONTRACT for c in enabled):
        state = init_state if init_state is not None else initial_state(contract)
        keep = []
        for c in enabled:
            if c.scope.kind == S.CONTRACT:
                v = eval_state(c.predicate, state)
                if v is not Bool3.TRUE:
                    drop(c, ProofResult(REFUTED if v is Bool3.FALSE else UNKNOWN, reason="initial state"))
                    continue
            keep.append(c)
        enabled = keep
    keep = []
    for c in enabled:
        why = check_translatable(contract, c)
        if why:
            drop(c, ProofResult(UNKNOWN, reason=why))
        else:
            keep.append(c)
    enabled = keep

    while True:
        out.rounds += 1
        results, n = modular_verify(contract, enabled, assumed, config, cache)
        out.queries += n
        failed = [c for c in enabled if results[c.id].status != PROVED]
        if not failed:
            break
        if rng is not None:
            failed = [rng.choice(failed)]
        gone = {c.id for c in failed}
        for c in failed:
            drop(c, results[c.id])
        enabled = [c for c in enabled if c.id not in gone]
        # only contract invariants are assumed by other obligations
        if rng is None and not any(c.scope.kind == S.CONTRACT for c in failed):
            break
    out.verified = enabled
    return out
