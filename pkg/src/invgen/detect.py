"""Candidate invariants from templates, classified against transaction histories."""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional

from .interp import Address, ExecutionRecord, successful
from .lang import ast as L
from .spec import ast as S
from .spec.evaluate import Bool3, Fault, compile_expr, eval_in
from .spec.printer import print_expr, print_statement

LIKELY, PARTIAL, DISCARDED = "likely", "partial", "discarded"
VERIFIED, REFUTED, UNDETERMINED = "verified", "refuted", "undetermined"
MAX_CONSTANTS = 8


class EmptyTrace(Exception):
    pass


@dataclass(eq=False)
class Candidate:
    scope: S.Scope
    predicate: S.Predicate
    origin: str = "primitive"  # primitive | implication | weakened
    support: int = 0
    refutations: int = 0
    undefined_count: int = 0
    status: str = DISCARDED

    @cached_property
    def id(self) -> str:
        return print_statement((self.scope, self.predicate))

    def __repr__(self) -> str:
        return f"<{self.status} {self.id}>"

    def statement(self, label: Optional[str] = None) -> S.SpecStatement:
        return S.SpecStatement(self.scope, self.predicate, label)


class CandidatePool:
    """Candidates keyed by their printed form; insertion order is kept."""

    def __init__(self, candidates: Iterable[Candidate] = ()):
        self.by_id: dict[str, Candidate] = {}
        for c in candidates:
            self.add(c)

    def add(self, c: Candidate) -> Candidate:
        return self.by_id.setdefault(c.id, c)

    def __contains__(self, cid: str) -> bool:
        return cid in self.by_id

    def __iter__(self) -> Iterator[Candidate]:
        return iter(self.by_id.values())

    def __len__(self) -> int:
        return len(self.by_id)

    def get(self, cid: str) -> Optional[Candidate]:
        return self.by_id.get(cid)

    def with_status(self, *statuses: str) -> list[Candidate]:
        return [c for c in self if c.status in statuses]

    @property
    def likely(self) -> list[Candidate]:
        return self.with_status(LIKELY)

    @property
    def partial(self) -> list[Candidate]:
        return self.with_status(PARTIAL)

    @property
    def verified(self) -> list[Candidate]:
        return self.with_status(VERIFIED)

    def in_scope(self, scope: S.Scope) -> list[Candidate]:
        return [c for c in self if c.scope == scope]


# ---------------------------------------------------------------------------
# Template instantiation
# ---------------------------------------------------------------------------

def _kind(ty: L.Type) -> Optional[str]:
    if L.is_integer(ty):
        return "num"
    if isinstance(ty, L.AddressT):
        return "addr"
    if isinstance(ty, L.BoolT):
        return "bool"
    return None


def _b(op: str, a: S.SpecExpr, b: S.SpecExpr) -> S.Atom:
    return S.Atom(S.Binary(op, a, b, S.BOOL))


def _arith(op: str, a: S.SpecExpr, b: S.SpecExpr) -> S.SpecExpr:
    return S.Binary(op, a, b, S.INTEGER)


def _text(e: S.SpecExpr) -> str:
    return print_expr(e)


A0 = S.Const(Address(0), S.ADDRESS)
TRUE = S.Const(True, S.BOOL)
FALSE = S.Const(False, S.BOOL)
ONE = S.Const(1, S.UINT)


def _storage_items(contract: L.ContractAst, phase: str, keys: dict[str, list[S.SpecExpr]]) -> list[S.SpecExpr]:
    """Scalar state variables, struct members, and mapping items indexed by ``keys`` (nesting <= 2)."""
    out: list[S.SpecExpr] = []

    def expand(e: S.SpecExpr, ty: L.Type, used: tuple):
        match ty:
            case L.StructT(name):
                for f in contract.struct(name).fields:
                    expand(S.Member(e, f.name, f.ty), f.ty, used)
            case L.MappingT(key, value):
                if len(used) >= 2:
                    return
                for src in keys.get(_kind(key), []):
                    if src not in used:
                        expand(S.Index(e, src, value), value, used + (src,))
            case _ if _kind(ty):
                out.append(e)

    for v in contract.state_vars:
        expand(S.Var(v.name, v.ty, phase), v.ty, ())
    return out


def _aggregates(contract: L.ContractAst) -> list[S.SpecExpr]:
    """SumMap over numeric mappings and len of mappings and arrays."""
    out: list[S.SpecExpr] = []
    for v in contract.state_vars:
        base = S.Var(v.name, v.ty, S.POST)
        match v.ty:
            case L.MappingT(_, value) if L.mapping_depth(v.ty) == 1:
                if L.is_integer(value):
                    out.append(S.SumMap(base))
                out.append(S.Len(base))
            case L.ArrayT():
                out.append(S.Len(base))
    return out


def _params(f: L.FunctionDecl) -> list[S.SpecExpr]:
    out = [S.Var(p.name, p.ty, S.PARAM) for p in f.params if _kind(p.ty)]
    out.append(S.Var("msg.sender", L.AddressT(), S.PARAM))
    return out


def _by_kind(items: Iterable[S.SpecExpr]) -> dict[str, list[S.SpecExpr]]:
    out: dict[str, list[S.SpecExpr]] = defaultdict(list)
    for e in items:
        k = _kind(e.ty)
        if k:
            out[k].append(e)
    return out


def _pairs(items: list[S.SpecExpr]):
    items = sorted(items, key=_text)
    return itertools.combinations(items, 2)


def requires_templates(contract: L.ContractAst, f: L.FunctionDecl) -> list[S.Predicate]:
    params = _by_kind(_params(f))
    pre = _by_kind(_storage_items(contract, S.PRE, params))
    maxvalue = S.Const(contract.maxvalue, L.UIntT(contract.width), "MAXVALUE")
    out: list[S.Predicate] = []
    addrs = params["addr"] + pre["addr"]
    for x in addrs:
        out.append(_b("!=", x, A0))
    for x, y in _pairs(addrs):
        out += [_b("==", x, y), _b("!=", x, y)]
    for z in params["num"]:
        out.append(_b("!=", z, S.Const(0, S.UINT)))
        for y in pre["num"]:
            out += [_b("<=", z, y), _b(">=", z, y), _b("<=", _arith("+", y, z), maxvalue)]
    for x in params["bool"] + pre["bool"]:
        out += [_b("==", x, TRUE), _b("==", x, FALSE)]
    return out


def ensures_templates(contract: L.ContractAst, f: L.FunctionDecl) -> list[S.Predicate]:
    params = _by_kind(_params(f))
    post = _storage_items(contract, S.POST, params)
    out: list[S.Predicate] = []
    for x in post:
        old = S.retime(x, S.POST, S.PRE)
        k = _kind(x.ty)
        out.append(_b("==", x, old))
        for z in params[k]:
            out.append(_b("==", x, z))
        match k:
            case "num":
                out += [_b(">=", x, old), _b("<=", x, old)]
                for z in params["num"] + [ONE]:
                    out += [_b("==", x, _arith("+", old, z)), _b("==", x, _arith("-", old, z))]
            case "addr":
                out.append(_b("==", x, A0))
            case "bool":
                out += [_b("==", x, TRUE), _b("==", x, FALSE)]
    return out


def _observed(traces: Iterable[ExecutionRecord], e: S.SpecExpr) -> list:
    g = compile_expr(e)
    values = set()
    for r in traces:
        for st in (r.pre, r.post):
            try:
                values.add(g((st, st, {})))
            except Fault:
                pass
    return sorted(values)


def contract_templates(contract: L.ContractAst, traces: Iterable[ExecutionRecord] = ()) -> list[S.Predicate]:
    items = _by_kind(_storage_items(contract, S.POST, {}) + _aggregates(contract))
    traces = list(traces)
    out: list[S.Predicate] = []
    nums = items["num"]
    for x, y in _pairs(nums):
        out += [_b("==", x, y), _b("<=", x, y), _b(">=", x, y)]
    for x in sorted(nums, key=_text):
        for y, z in _pairs([n for n in nums if n != x]):
            out.append(_b("==", x, _arith("+", y, z)))
    for x in items["addr"]:
        out += [_b("==", x, A0), _b("!=", x, A0)]
    for x, y in _pairs(items["addr"]):
        out += [_b("==", x, y), _b("!=", x, y)]
    for x in items["bool"]:
        out += [_b("==", x, TRUE), _b("==", x, FALSE)]
    if traces:
        for x in nums:
            values = _observed(traces, x)
            if not values:
                continue
            if len(values) <= MAX_CONSTANTS:
                out += [_b("==", x, S.Const(v, S.UINT)) for v in values]
            lo, hi = min(values), max(values)
            if lo > 0 or not isinstance(x.ty, L.UIntT):
                out.append(_b(">=", x, S.Const(lo, S.UINT)))
            out.append(_b("<=", x, S.Const(hi, S.UINT)))
    return out


def initialize_candidates(contract: L.ContractAst, traces: Iterable[ExecutionRecord] = ()) -> CandidatePool:
    """Instantiate every template over every type-compatible tuple of expressions.

    ``traces`` only supplies the constants for the constant and extremum templates.
    """
    pool = CandidatePool()
    for p in contract_templates(contract, traces):
        pool.add(Candidate(S.CONTRACT_SCOPE, p))
    for f in contract.public_functions:
        for p in requires_templates(contract, f):
            pool.add(Candidate(S.Scope(S.REQUIRES, f.name), p))
        for p in ensures_templates(contract, f):
            pool.add(Candidate(S.Scope(S.ENSURES, f.name), p))
    return pool


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def classify(c: Candidate, min_support: int) -> str:
    if c.support < min_support:
        return DISCARDED
    return LIKELY if c.refutations == 0 else PARTIAL


def count(c: Candidate, records: Iterable[ExecutionRecord]) -> None:
    for r in records:
        match eval_in(c.scope, c.predicate, r):
            case Bool3.TRUE:
                c.support += 1
            case Bool3.FALSE:
                c.refutations += 1
            case Bool3.UNDEFINED:
                c.undefined_count += 1


def relevant_records(scope: S.Scope, records: list[ExecutionRecord],
                     by_function: Optional[dict] = None) -> list[ExecutionRecord]:
    if scope.kind == S.CONTRACT:
        return records
    if by_function is not None:
        return by_function.get(scope.function, [])
    return [r for r in records if r.call.function == scope.function]


def detect(traces: Iterable[ExecutionRecord], pool: CandidatePool | Iterable[Candidate],
           min_support: int = 3) -> tuple[list[Candidate], list[Candidate]]:
    """Count support for every candidate on the successful records; returns (likely, partial)."""
    if min_support < 1:
        raise ValueError("min_support must be at least 1")
    records = successful(list(traces))
    if not records:
        raise EmptyTrace("no successful records in the transaction history")
    by_function: dict[str, list[ExecutionRecord]] = defaultdict(list)
    for r in records:
        by_function[r.call.function].append(r)
    cands = list(pool)
    for c in cands:
        c.support = c.refutations = c.undefined_count = 0
        count(c, relevant_records(c.scope, records, by_function))
        c.status = classify(c, min_support)
    return [c for c in cands if c.status == LIKELY], [c for c in cands if c.status == PARTIAL]


__all__ = [
    "Candidate", "CandidatePool", "EmptyTrace", "LIKELY", "PARTIAL", "DISCARDED", "VERIFIED", "REFUTED",
    "UNDETERMINED", "classify", "contract_templates", "detect", "ensures_templates", "initialize_candidates",
    "requires_templates",
]
