import io
import json

import pytest
from hypothesis import given, settings, strategies as st

from invgen.corpus import NAMES, load
from invgen.interp import Address, Call, execute_call, generate_history, initial_state, replay_history
from invgen.traceio import (TraceParseError, TraceSchemaError, decode_calls, decode_traces, encode_calls,
                            encode_traces)

A = Address
CONTRACTS = {n: load(n) for n in NAMES}
R1_LINE = ('{"args":{"from":"a1","to":"a2","tokens":"5"},"block":1,"function":"transferFrom",'
           '"post":{"allows":{"a1":{"a2":"5"}},"balances":{"a1":"55","a2":"45"},"totalSupply":"100"},'
           '"pre":{"allows":{"a1":{"a2":"10"}},"balances":{"a1":"60","a2":"40"},"totalSupply":"100"},'
           '"sender":"a2","status":"success","tx":0}')


def encode(records) -> str:
    buf = io.StringIO()
    encode_traces(records, buf)
    return buf.getvalue()


@pytest.fixture
def r1(mini, s0):
    return execute_call(mini, s0, Call("transferFrom", {"from": A(1), "to": A(2), "tokens": 5}, A(2), 1))


def test_r1_golden_line(r1):
    assert encode([r1]) == R1_LINE + "\n"


def test_r1_decodes(mini, r1):
    assert decode_traces(io.StringIO(R1_LINE), mini) == [r1]
    assert decode_traces(io.StringIO(R1_LINE)) == [r1]


def test_empty():
    assert encode([]) == ""
    assert decode_traces(io.StringIO("")) == []


def test_missing_fields_is_parse_error():
    with pytest.raises(TraceParseError) as info:
        decode_traces(io.StringIO('{"tx": 0}\n'))
    assert info.value.line == 1


def test_bad_json_reports_line():
    with pytest.raises(TraceParseError) as info:
        decode_traces(io.StringIO(R1_LINE + "\n{oops\n"))
    assert info.value.line == 2


def test_missing_argument_is_schema_error(mini):
    obj = json.loads(R1_LINE)
    del obj["args"]["tokens"]
    with pytest.raises(TraceSchemaError, match="tokens"):
        decode_traces(io.StringIO(json.dumps(obj)), mini)


def test_ill_typed_state_is_schema_error(mini):
    obj = json.loads(R1_LINE)
    obj["post"]["balances"]["a1"] = "a3"
    with pytest.raises((TraceSchemaError, TraceParseError)):
        decode_traces(io.StringIO(json.dumps(obj)), mini)


def test_tx_ids_must_increase():
    with pytest.raises(TraceParseError):
        decode_traces(io.StringIO(R1_LINE + "\n" + R1_LINE + "\n"))


def test_large_values_survive(mini):
    big = mini.maxvalue
    state = {"totalSupply": big, "balances": {A(1): big}, "allows": {A(1): {A(1): big}}}
    r = execute_call(mini, state, Call("transferFrom", {"from": A(1), "to": A(1), "tokens": big}, A(1)))
    assert decode_traces(io.StringIO(encode([r])), mini) == [r]
    assert str(big) in encode([r])


@settings(max_examples=1000, deadline=None)
@given(st.sampled_from(NAMES), st.integers(0, 12), st.integers(0, 2**32))
def test_round_trip_and_canonical(name, n, seed):
    c = CONTRACTS[name]
    records = replay_history(c, initial_state(c), generate_history(c, n, seed))
    text = encode(records)
    back = decode_traces(io.StringIO(text), c)
    assert back == records
    assert encode(back) == text


@pytest.mark.parametrize("name", NAMES)
def test_calls_round_trip(name):
    c = CONTRACTS[name]
    calls = generate_history(c, 30, 3)
    buf = io.StringIO()
    encode_calls(calls, buf)
    assert decode_calls(io.StringIO(buf.getvalue()), c) == calls
