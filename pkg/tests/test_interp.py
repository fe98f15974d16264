import copy

import pytest

from invgen.corpus import NAMES, load
from invgen.interp import (Address, Call, ExecutionRecord, check_value, execute_call, generate_history,
                           initial_state, replay_history, successful)

A = Address

R1_CALL = Call("transferFrom", {"from": A(1), "to": A(2), "tokens": 5}, A(2), 1)
R2_CALL = Call("transferFrom", {"from": A(1), "to": A(0), "tokens": 1}, A(2), 2)
R3_CALL = Call("transferFrom", {"from": A(1), "to": A(2), "tokens": 999}, A(2), 3)


def test_valid_transfer(mini, s0):
    r = execute_call(mini, s0, R1_CALL)
    assert r.ok
    assert r.post == {"totalSupply": 100, "balances": {A(1): 55, A(2): 45}, "allows": {A(1): {A(2): 5}}}


def test_zero_address_early_return(mini, s0):
    r = execute_call(mini, s0, R2_CALL)
    assert r.ok and r.return_value is False and r.post == s0


def test_allowance_underflow_reverts(mini, s0):
    r = execute_call(mini, s0, R3_CALL)
    assert r.status == "reverted" and r.post == r.pre == s0


def test_execute_does_not_mutate_input(mini, s0):
    before = copy.deepcopy(s0)
    execute_call(mini, s0, R1_CALL)
    assert s0 == before


def test_replay_threads_state(mini, s0):
    recs = replay_history(mini, s0, [R1_CALL, R3_CALL, R2_CALL])
    assert [r.status for r in recs] == ["success", "reverted", "success"]
    assert [r.tx_id for r in recs] == [0, 1, 2]
    assert recs[1].post == recs[1].pre == recs[0].post
    assert replay_history(mini, s0, []) == []


def test_generate_history_basics(mini):
    assert generate_history(mini, 0, 5) == []
    assert generate_history(mini, 10, 42) == generate_history(mini, 10, 42)
    assert generate_history(mini, 10, 42) != generate_history(mini, 10, 43)


def test_seed7_coverage(seed7_ok):
    args = [r.call.args for r in seed7_ok]
    assert sum(a["to"] != 0 and a["from"] != a["to"] for a in args) >= 3
    assert sum(a["to"] == 0 for a in args) >= 3
    assert sum(a["from"] == a["to"] for a in args) >= 3


@pytest.mark.parametrize("name", NAMES)
def test_every_function_gets_support(name):
    c = load(name)
    recs = successful(replay_history(c, initial_state(c), generate_history(c, 50 * len(c.public_functions), 1)))
    for f in c.public_functions:
        assert sum(r.call.function == f.name for r in recs) >= 3, f.name


@pytest.mark.parametrize("name", NAMES)
def test_reversion_atomicity_and_state_typing(name):
    c = load(name)
    recs = replay_history(c, initial_state(c), generate_history(c, 1000, 11))
    assert len(recs) == 1000
    checked = name != "bec"  # the only corpus contract with unchecked arithmetic
    for r in recs:
        if not r.ok:
            assert r.post == r.pre
        elif checked:
            for v in c.state_vars:
                assert check_value(r.post[v.name], v.ty, c), (r.tx_id, v.name)


def test_execution_is_deterministic(mini, seed7):
    for r in seed7[:50]:
        again = execute_call(mini, r.pre, r.call, r.tx_id)
        assert again == r and again.return_value == r.return_value


def test_checked_overflow_reverts():
    c = load("bec_checked")
    big = 1 << 63
    call = Call("batchTransfer", {"_receivers": [A(2), A(3)], "_value": big}, A(1), 1)
    assert execute_call(c, initial_state(c), call).status == "reverted"


def test_unchecked_product_wraps():
    c = load("bec")
    big = 1 << 63
    call = Call("batchTransfer", {"_receivers": [A(2), A(3)], "_value": big}, A(1), 1)
    r = execute_call(c, initial_state(c), call)
    assert r.ok
    assert r.post["balances"][A(1)] == 1000  # 2 * 2**63 wrapped to zero
    assert r.post["balances"][A(2)] == 1000 + big


def test_assert_failure_is_flagged():
    from invgen.lang import parse_contract
    c = parse_contract("contract C { uint x; function f(uint a) public { assert(a > 0); x = a; } }")
    r = execute_call(c, initial_state(c), Call("f", {"a": 0}, A(1)))
    assert r.status == "reverted" and r.assertion_failure


def test_division_by_zero_reverts():
    from invgen.lang import parse_contract
    c = parse_contract("contract C { uint x; function f(uint a) public { x = 10 / a; } }")
    assert execute_call(c, initial_state(c), Call("f", {"a": 0}, A(1))).status == "reverted"
    assert execute_call(c, initial_state(c), Call("f", {"a": 3}, A(1))).post == {"x": 3}


def test_mapping_entries_stay_canonical(mini):
    state = {"totalSupply": 100, "balances": {A(1): 5}, "allows": {A(1): {A(1): 5}}}
    r = execute_call(mini, state, Call("transferFrom", {"from": A(1), "to": A(2), "tokens": 5}, A(1)))
    assert r.ok
    assert A(1) not in r.post["balances"]
    assert r.post["allows"].get(A(1), {}).get(A(1), 0) == 0
    assert check_value(r.post["allows"], mini.state_var("allows").ty, mini)


def test_record_equality_ignores_return_value(mini, s0):
    r = execute_call(mini, s0, R1_CALL)
    assert r == ExecutionRecord(r.tx_id, r.pre, r.call, r.post, r.status)
