import itertools
import os
import re
import shutil

import pytest

from invgen.corpus import load
from invgen.detect import Candidate
from invgen.interp import Address, Call, execute_call, initial_state
from invgen.lang import parse_contract
from invgen.spec import Bool3, eval_in, parse_spec, parse_statement
from invgen.verify import (PROVED, REFUTED, UNKNOWN, AssertionViolation, BackendConfig, BackendUnavailable, Note,
                           Source, SymState, VerificationQuery, discharge, gen_vcs, static_infer)
from invgen.verify import logic as T
from running_example import LIKELY_TEXT, STEP1_VERIFIED

A = Address
BUILTIN = BackendConfig()

LIKELY = LIKELY_TEXT


def notes(text, contract):
    return [Note(f"n{i}", s.scope, s.body) for i, s in enumerate(parse_spec(text, contract))]


def candidates(text, contract):
    return [Candidate(s.scope, s.body) for s in parse_spec(text, contract)]


TABLE_ENTRY = re.compile(r"(.*)\[(-?\d+(?:,-?\d+)*)\]")


def rebuild(model: dict[str, int]) -> T.Model:
    """Turn a flattened backend model back into variable values and function tables."""
    values, tables = {}, {}
    for name, v in model.items():
        if m := TABLE_ENTRY.fullmatch(name):
            tables[(m[1], tuple(int(x) for x in m[2].split(",")))] = v
        else:
            values[name] = v
    return T.Model(values, tables)


# --- query generation ------------------------------------------------------------

def test_one_query_per_path_and_obligation(mini):
    ann = notes("ContractInv totalSupply == SumMap(balances)\n"
                "Ensures transferFrom: balances[to] >= old(balances[to])\n", mini)
    qs = gen_vcs(mini, "transferFrom", ann)
    # two successful paths (early return, full transfer) times two obligations
    assert len(qs) == 4
    assert {q.source.ref for q in qs} == {"n0", "n1"}
    assert len({q.path_id for q in qs}) == 2


def test_bare_assert_gives_one_unconditional_query():
    c = parse_contract("contract C { uint x; function f() public { assert(x > 0); } }")
    qs = gen_vcs(c, "f", [])
    assert len(qs) == 1
    assert qs[0].source.kind == "assertion" and qs[0].assumptions == ()


def test_loop_bound_is_validated(mini):
    with pytest.raises(ValueError):
        gen_vcs(mini, "transferFrom", [], loop_bound=0)
    with pytest.raises(ValueError):
        BackendConfig(loop_bound=0)


# --- discharge ------------------------------------------------------------------

def test_subtraction_bounded_by_guard():
    a, tokens = T.var("p.a", 0, 2**256 - 1), T.var("p.tokens", 0, 2**256 - 1)
    q = VerificationQuery("f", 0, (T.cmp("<=", tokens, a),), T.cmp("<=", T.sub(a, tokens), a), Source("candidate", "x"))
    assert discharge(q, BUILTIN).status == PROVED


def test_refutation_names_the_zero_address():
    to = T.var("p.to", 0, (1 << 160) - 1)
    q = VerificationQuery("f", 0, (), T.cmp("!=", to, T.ZERO), Source("candidate", "x"))
    res = discharge(q, BUILTIN)
    assert res.status == REFUTED and res.model == {"p.to": 0}


def test_transfer_credit_with_symbolic_store(mini):
    ty = mini.state_var("balances").ty.value
    st = SymState(mini)
    frm, to = T.var("p.from", 0, (1 << 160) - 1), T.var("p.to", 0, (1 << 160) - 1)
    tokens = T.var("p.tokens", 0, mini.maxvalue)
    bal_f, bal_t = st.read("balances", (frm,), ty), st.read("balances", (to,), ty)
    st.write("balances", (frm,), T.sub(bal_f, tokens), ty)
    st.write("balances", (to,), T.add(st.read("balances", (to,), ty), tokens), ty)
    facts = (T.cmp("<=", tokens, bal_f), T.cmp("<=", T.add(bal_t, tokens), T.const(mini.maxvalue)),
             T.cmp("!=", frm, to))
    goal = T.eq(st.read("balances", (to,), ty), T.add(bal_t, tokens))
    assert discharge(VerificationQuery("transferFrom", 0, facts, goal, Source("candidate", "x")), BUILTIN).proved
    # without the distinctness fact the credit is cancelled when from == to
    res = discharge(VerificationQuery("transferFrom", 0, facts[:2], goal, Source("candidate", "x")), BUILTIN)
    assert res.refuted and res.model["p.from"] == res.model["p.to"]


def test_refuted_models_satisfy_assumptions_and_break_obligation(mini):
    pool = notes(LIKELY + "Requires transferFrom: from != to\n"
                 "Ensures transferFrom: balances[to] == old(balances[to]) + tokens\n"
                 "Ensures transferFrom: allows[from][msg.sender] == old(allows[from][msg.sender]) - tokens\n"
                 "Ensures transferFrom: balances[from] == old(balances[from])\n", mini)
    refuted = 0
    for q in gen_vcs(mini, "transferFrom", pool):
        res = discharge(q, BUILTIN)
        if res.refuted:
            refuted += 1
            m = rebuild(res.model)
            assert all(m.formula(f) for f in q.assumptions), q.source
            assert not m.formula(q.obligation), q.source
    assert refuted >= 3


COUNTER = parse_contract(
    "contract C { uint x; function f(uint n) public { for (uint i = 0; i < n; i++) { x = x + 1; } } }")


def test_truncated_loop_is_unknown():
    ann = notes("Ensures f: x >= old(x)\n", COUNTER)
    qs = gen_vcs(COUNTER, "f", ann, loop_bound=2)
    results = [discharge(q, BUILTIN) for q in qs if q.truncated]
    assert results and all(r.status == UNKNOWN and r.reason == "loop-bound" for r in results)


def test_unchecked_product_leaves_sum_invariant_open():
    bec = load("bec")
    res = static_infer(bec, candidates("ContractInv SumMap(balances) == totalSupply\n", bec), (), BUILTIN,
                       initial_state(bec))
    assert not res.verified and res.undetermined


def test_enum_backend_never_proves(mini):
    pool = notes(LIKELY + "Requires transferFrom: from != to\n", mini)
    enum = BackendConfig(backend="enum", samples=60)
    statuses = {discharge(q, enum).status for q in gen_vcs(mini, "transferFrom", pool)}
    assert PROVED not in statuses and REFUTED in statuses


def test_missing_solver_is_reported():
    q = VerificationQuery("f", 0, (), T.BoolConst(True), Source("candidate", "x"))
    with pytest.raises(BackendUnavailable):
        discharge(q, BackendConfig(backend="smt", solver="/nonexistent/solver"))


SOLVER = os.environ.get("MINISOLVER") or shutil.which("z3")


@pytest.mark.skipif(SOLVER is None, reason="no SMT solver installed")
def test_smt_agrees_with_builtin(mini):
    pool = notes(LIKELY + "Requires transferFrom: from != to\n"
                 "Ensures transferFrom: balances[to] == old(balances[to]) + tokens\n", mini)
    smt = BackendConfig(backend="smt", solver=SOLVER)
    for q in gen_vcs(mini, "transferFrom", pool):
        a, b = discharge(q, BUILTIN).status, discharge(q, smt).status
        assert UNKNOWN in (a, b) or a == b, q.source


# --- static inference -----------------------------------------------------------

def test_likely_invariants_of_the_running_example(mini, s0):
    res = static_infer(mini, candidates(LIKELY, mini), (), BUILTIN, s0)
    assert sorted(c.id for c in res.verified) == sorted(STEP1_VERIFIED)
    assert [c.id for c in res.refuted] == ["Requires transferFrom: to != a0"]


SELF_TRANSFER = ("Ensures transferFrom: from == to ==> balances[from] == old(balances[from])\n"
                 "Ensures transferFrom: from == to ==> balances[to] == old(balances[to])\n")


def test_self_transfer_leaves_balance_unchanged(mini, s0):
    proved = static_infer(mini, candidates(LIKELY, mini), (), BUILTIN, s0).verified
    res = static_infer(mini, candidates(SELF_TRANSFER, mini), proved, BUILTIN, s0)
    assert len(res.verified) == 2


def test_self_transfer_claim_holds_on_every_small_state(mini):
    # independent check of the proof above by exhaustive execution
    stmts = [parse_statement(line, mini) for line in SELF_TRANSFER.splitlines()]
    for a, bal, allow, tokens in itertools.product(range(3), range(4), range(4), range(5)):
        state = {"totalSupply": bal, "balances": {A(a): bal} if bal else {},
                 "allows": {A(a): {A(1): allow}} if allow else {}}
        r = execute_call(mini, state, Call("transferFrom", {"from": A(a), "to": A(a), "tokens": tokens}, A(1)))
        if r.ok:
            assert all(eval_in(s.scope, s.body, r) is Bool3.TRUE for s in stmts)


def test_houdini_result_does_not_depend_on_order(mini, s0):
    pool = LIKELY + ("Ensures transferFrom: balances[to] == old(balances[to]) + tokens\n"
                     "Ensures transferFrom: totalSupply == old(totalSupply)\n"
                     "Ensures transferFrom: balances[from] == old(balances[from]) - tokens\n")
    runs = [static_infer(mini, candidates(pool, mini), (), BUILTIN, s0, order_seed=seed) for seed in (None, 1, 2, 3)]
    assert len({frozenset(c.id for c in r.verified) for r in runs}) == 1


def test_failing_assertion_is_reported():
    c = parse_contract("contract C { uint x; function f() public { assert(false); } }")
    with pytest.raises(AssertionViolation):
        static_infer(c, [], (), BUILTIN, initial_state(c))
