"""Drop verified invariants that follow from a single other verified invariant."""

from __future__ import annotations

import random
from collections import defaultdict
from typing import Any, Iterable

from .detect import Candidate
from .interp import Address
from .lang import ast as L
from .spec import ast as S
from .spec.evaluate import Bool3, compile_predicate
from .verify.backends import BackendConfig
from .verify.queries import YES, entails


def canonical_key(c: Candidate) -> tuple:
    return (len(c.id), c.id)


class Valuations:
    """Random small-domain valuations of a scope's vocabulary.

    Entailment quantifies over every well-typed valuation, so one valuation
    making ``p`` true and ``q`` false rules out ``p`` entailing ``q`` without a
    solver call. Small domains make coincidences such as ``x == old(x) + t``
    frequent enough to be sampled.
    """

    def __init__(self, contract: L.ContractAst, scope: S.Scope, n: int = 192, seed: int = 0):
        self.contract = contract
        self.rng = random.Random(seed)
        self.addresses = [Address(i) for i in range(4)]
        self.numbers = [0, 1, 2, 3, contract.maxvalue]
        f = contract.function(scope.function) if scope.function else None
        self.envs = []
        for _ in range(n):
            pre = self.state()
            post = pre if scope.kind != S.ENSURES else self.state()
            params: dict[str, Any] = {"msg.sender": self.rng.choice(self.addresses),
                                      "block.number": self.rng.choice(self.numbers)}
            for p in (f.params if f is not None else ()):
                params[p.name] = self.value(p.ty)
            if scope.kind == S.CONTRACT:
                self.envs.append((post, post, {}))
            else:
                self.envs.append((pre, post, params))
        self.memo: dict[S.Predicate, tuple[int, int]] = {}

    def state(self) -> dict:
        return {v.name: self.value(v.ty) for v in self.contract.state_vars}

    def value(self, ty: L.Type, depth: int = 0) -> Any:
        rng = self.rng
        match ty:
            case L.UIntT():
                return rng.choice(self.numbers)
            case L.IntT():
                return rng.choice([-2, -1, 0, 1, 2])
            case L.BoolT():
                return rng.random() < 0.5
            case L.AddressT():
                return rng.choice(self.addresses)
            case L.StringT() | L.BytesT():
                return rng.choice(["", "x"])
            case L.ArrayT(elem):
                return [self.value(elem, depth + 1) for _ in range(rng.randrange(4))]
            case L.MappingT(key, val):
                keys = self.addresses if isinstance(key, L.AddressT) else list(range(4))
                return {k: self.value(val, depth + 1) for k in keys}
            case L.StructT(name):
                return {fd.name: self.value(fd.ty, depth + 1) for fd in self.contract.struct(name).fields}
        raise TypeError(ty)

    def masks(self, p: S.Predicate) -> tuple[int, int]:
        hit = self.memo.get(p)
        if hit is None:
            f = compile_predicate(p)
            t = fl = 0
            for i, env in enumerate(self.envs):
                match f(env):
                    case Bool3.TRUE:
                        t |= 1 << i
                    case Bool3.FALSE:
                        fl |= 1 << i
            hit = self.memo[p] = (t, fl)
        return hit

    def may_entail(self, p: S.Predicate, q: S.Predicate) -> bool:
        return not (self.masks(p)[0] & self.masks(q)[1])


def suppress(verified: Iterable[Candidate], contract: L.ContractAst,
             config: BackendConfig = BackendConfig()) -> list[Candidate]:
    """Keep only candidates not entailed by another one of the same scope.

    Of two equivalent candidates the one with the smaller canonical form
    survives; an undecided entailment keeps both.
    """
    groups: dict = defaultdict(list)
    for c in verified:
        groups[c.scope].append(c)
    memo: dict[tuple[str, str], bool] = {}

    kept: list[Candidate] = []
    for scope in sorted(groups, key=lambda s: s.sort_key):
        group = sorted({c.id: c for c in groups[scope]}.values(), key=canonical_key)
        sample = Valuations(contract, scope)

        def implies(p: Candidate, q: Candidate) -> bool:
            key = (p.id, q.id)
            if key not in memo:
                memo[key] = (sample.may_entail(p.predicate, q.predicate)
                             and entails(p.predicate, q.predicate, contract, scope, config).answer == YES)
            return memo[key]

        for q in group:
            redundant = any(
                p is not q and implies(p, q) and (canonical_key(p) < canonical_key(q) or not implies(q, p))
                for p in group)
            if not redundant:
                kept.append(q)
    return kept
