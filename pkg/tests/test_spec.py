import itertools
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from invgen.detect import detect, initialize_candidates
from invgen.interp import Address, Call, execute_call
from invgen.lang import parse_contract
from invgen.spec import (CONTRACT, ENSURES, REQUIRES, Atom, Bool3, Falsum, Implies, Scope, ScopeMismatch,
                         SpecKindError, SpecScopeError, SpecSyntaxError, eval_in, eval_predicate, parse_spec,
                         parse_statement, print_statement)
from invgen.spec.evaluate import compile_predicate
from invgen.verify.queries import CONTRADICTION, NEITHER, NO, TAUTOLOGY, YES, classify_trivial, entails

A = Address
TF = Scope(ENSURES, "transferFrom")
REQ = Scope(REQUIRES, "transferFrom")
INV1 = "Ensures transferFrom: to != a0 ==> allows[from][msg.sender] == old(allows[from][msg.sender]) - tokens"


def stmt(text, contract):
    return parse_statement(text, contract)


def pred(text, contract, scope="Ensures transferFrom: "):
    return stmt(scope + text, contract).body


@pytest.fixture
def r1(mini, s0):
    return execute_call(mini, s0, Call("transferFrom", {"from": A(1), "to": A(2), "tokens": 5}, A(2), 1))


@pytest.fixture
def r2(mini, s0):
    return execute_call(mini, s0, Call("transferFrom", {"from": A(1), "to": A(0), "tokens": 1}, A(2), 2))


# --- parsing -----------------------------------------------------------------

def test_parse_implication(mini):
    s = stmt(INV1, mini)
    assert s.scope == TF and isinstance(s.body, Implies)
    assert print_statement(s) == INV1


def test_parse_contract_invariant(mini):
    s = stmt("ContractInv SumMap(balances) == totalSupply", mini)
    assert s.scope.kind == CONTRACT and isinstance(s.body, Atom)


def test_old_in_requires_is_kind_error(mini):
    with pytest.raises(SpecKindError):
        stmt("Requires transferFrom: old(totalSupply) > 0", mini)


def test_implication_in_requires_is_kind_error(mini):
    with pytest.raises(SpecKindError):
        stmt("Requires transferFrom: from != to ==> tokens > 0", mini)


@pytest.mark.parametrize("text, error", [
    ("Ensures mint: totalSupply > 0", SpecScopeError),
    ("Ensures transferFrom: supply > 0", SpecScopeError),
    ("ContractInv tokens > 0", SpecScopeError),
    ("Ensures transferFrom: totalSupply >", SpecSyntaxError),
    ("Invariant totalSupply > 0", SpecSyntaxError),
])
def test_parse_errors(mini, text, error):
    with pytest.raises(error):
        stmt(text, mini)


def test_labels_and_comments(mini):
    out = parse_spec("# heading\n\n[c1] ContractInv SumMap(balances) == totalSupply\n// note\n", mini)
    assert len(out) == 1 and out[0].label == "c1"
    with pytest.raises(SpecSyntaxError):
        parse_spec("[x] ContractInv totalSupply >= 0\n[x] ContractInv totalSupply >= 1\n", mini)


def test_print_parse_round_trip_on_pool(mini, seed7_ok):
    pool = initialize_candidates(mini, seed7_ok)
    for c in pool:
        again = stmt(c.id, mini)
        assert (again.scope, again.body) == (c.scope, c.predicate)


# --- evaluation --------------------------------------------------------------

def test_eval_examples(mini, r1, r2):
    s = stmt(INV1, mini)
    assert eval_predicate(s, r1) is Bool3.TRUE
    assert eval_predicate(s, r2) is Bool3.TRUE
    fault = stmt("Ensures transferFrom: tokens / (balances[to] - old(balances[to])) == 1", mini)
    assert eval_predicate(fault, r2) is Bool3.UNDEFINED


def test_contract_invariant_needs_both_states(mini, s0):
    inv = stmt("ContractInv totalSupply == 100", mini)
    r = execute_call(mini, s0, Call("transferFrom", {"from": A(1), "to": A(2), "tokens": 5}, A(2)))
    assert eval_predicate(inv, r) is Bool3.TRUE
    assert eval_predicate(inv, replace(r, post={**r.post, "totalSupply": 99})) is Bool3.FALSE
    assert eval_predicate(inv, replace(r, pre={**r.pre, "totalSupply": 99})) is Bool3.FALSE


def test_scope_mismatch(mini, r1):
    c = parse_contract("contract C { uint x; function g() public { x = 1; } }")
    s = stmt("Ensures g: x == 1", c)
    with pytest.raises(ScopeMismatch):
        eval_in(s.scope, s.body, r1)


def test_falsum():
    assert compile_predicate(Falsum())(({}, {}, {})) is Bool3.FALSE


def test_no_undefined_without_faults(mini, seed7_ok):
    pool = initialize_candidates(mini, seed7_ok)
    for c in pool:
        if "/" in c.id:
            continue
        for r in seed7_ok[:40]:
            if c.scope.kind == CONTRACT or c.scope.function == r.call.function:
                assert eval_in(c.scope, c.predicate, r) is not Bool3.UNDEFINED


def test_vacuous_implications(mini, seed7_ok):
    pool = initialize_candidates(mini, seed7_ok)
    atoms = [c.predicate.expr for c in pool if c.scope == TF and isinstance(c.predicate, Atom)][:25]
    for lhs, rhs in itertools.product(atoms[:8], atoms):
        imp = Implies(lhs, rhs)
        for r in seed7_ok[:25]:
            if eval_in(TF, Atom(lhs), r) is Bool3.FALSE:
                assert eval_in(TF, imp, r) is Bool3.TRUE


# --- semantic queries --------------------------------------------------------

def test_classify_examples(mini):
    assert classify_trivial(pred("tokens >= 0", mini), mini, TF) == TAUTOLOGY
    assert classify_trivial(Falsum(), mini, TF) == CONTRADICTION
    assert classify_trivial(pred("from != to", mini), mini, TF) == NEITHER


def test_entails_examples(mini):
    p = pred("balances[to] == old(balances[to]) + tokens", mini)
    q = pred("balances[to] >= old(balances[to])", mini)
    assert entails(p, p, mini, TF).answer == YES
    assert entails(p, q, mini, TF).answer == YES
    v = entails(pred("from != to", mini), pred("to != a0", mini), mini, TF)
    assert v.answer == NO and v.counterexample is not None


def test_entails_is_a_preorder(mini, seed7_ok):
    pool = initialize_candidates(mini, seed7_ok)
    likely, partial = detect(seed7_ok, pool)
    preds = [c.predicate for c in likely + partial if c.scope == TF][:12]
    yes = {(i, j) for i, j in itertools.product(range(len(preds)), repeat=2)
           if entails(preds[i], preds[j], mini, TF).answer == YES}
    assert all((i, i) in yes for i in range(len(preds)))
    for (i, j), (k, m) in itertools.product(yes, yes):
        if j == k:
            assert (i, m) in yes


# Brute-force oracle: three uint(4) parameters, every valuation enumerated.
SMALL = parse_contract("contract C { uint s; function f(uint a, uint b, uint c) public { s = a; } }", width=4)
SMALL_REQ = Scope(REQUIRES, "f")

term = st.sampled_from(["a", "b", "c", "0", "1", "3", "15"])
arith = st.one_of(term, st.builds(lambda x, op, y: f"{x} {op} {y}", term, st.sampled_from(["+", "-"]), term))
cmp = st.builds(lambda x, op, y: f"{x} {op} {y}", arith, st.sampled_from(["==", "!=", "<", "<=", ">", ">="]), arith)
boolean = st.one_of(cmp, st.builds(lambda x, op, y: f"{x} {op} {y}", cmp, st.sampled_from(["&&", "||"]), cmp))


def brute(text: str) -> str:
    body = parse_statement(f"Requires f: {text}", SMALL).body
    f = compile_predicate(body)
    truth = {f(({}, {}, {"a": a, "b": b, "c": c})) for a, b, c in itertools.product(range(16), repeat=3)}
    if truth == {Bool3.TRUE}:
        return TAUTOLOGY
    if Bool3.TRUE not in truth:
        return CONTRADICTION
    return NEITHER


@settings(max_examples=150, deadline=None)
@given(boolean)
def test_classify_trivial_matches_enumeration(text):
    body = parse_statement(f"Requires f: {text}", SMALL).body
    assert classify_trivial(body, SMALL, SMALL_REQ) == brute(text)
