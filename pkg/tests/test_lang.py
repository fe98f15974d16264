import pytest
from hypothesis import given, settings, strategies as st

from invgen.corpus import NAMES, WIDTHS, source
from invgen.lang import (ContractSyntaxError, ContractTypeError, DuplicateNameError, parse_contract,
                         print_contract)
from invgen.lang.deps import compute_deps, function_universe


def test_erc20_mini_shape(mini):
    assert [v.name for v in mini.state_vars] == ["totalSupply", "balances", "allows"]
    assert [f.name for f in mini.public_functions] == ["transferFrom"]


def test_minimal_contract():
    c = parse_contract("contract C { uint x; }")
    assert len(c.state_vars) == 1 and c.functions == ()


def test_unknown_type():
    with pytest.raises(ContractTypeError, match="unknown type float"):
        parse_contract("contract C { float x; }")


def test_syntax_error_has_position():
    with pytest.raises(ContractSyntaxError) as info:
        parse_contract("contract C {\n  uint x\n}")
    d = info.value.diagnostic
    assert d.line >= 2 and d.col > 0
    assert info.value.render("c.mc").startswith(f"c.mc:{d.line}:{d.col}: error:")


def test_mapping_compared_to_int_is_type_error():
    with pytest.raises(ContractTypeError):
        parse_contract("contract C { mapping(address => uint) m; function f() public { require(m == 1); } }")


@pytest.mark.parametrize("src", [
    "contract C { uint x; bool x; }",
    "contract C { function f() public {} function f() public {} }",
])
def test_duplicate_names(src):
    with pytest.raises(DuplicateNameError):
        parse_contract(src)


def test_safemath_calls_become_checked_ops(mini):
    text = print_contract(mini)
    assert ".sub(" not in text and ".add(" not in text
    assert "balances[from] - tokens" in text and "balances[to] + tokens" in text


@pytest.mark.parametrize("name", NAMES)
def test_print_parse_round_trip(name):
    w = WIDTHS.get(name, 256)
    c = parse_contract(source(name), width=w)
    again = parse_contract(print_contract(c), width=w)
    assert print_contract(again) == print_contract(c)
    assert again.state_vars == c.state_vars
    assert [f.name for f in again.functions] == [f.name for f in c.functions]


def test_deps_examples(mini):
    d = compute_deps(mini)
    assert d.dep("transferFrom", "balances", "to")
    assert not d.dep("transferFrom", "totalSupply", "tokens")
    assert d.dep("transferFrom", "tokens", "tokens")


@pytest.mark.parametrize("name", NAMES)
def test_deps_mention_only_known_names(name):
    c = parse_contract(source(name), width=WIDTHS.get(name, 256))
    d = compute_deps(c)
    for f in c.public_functions:
        universe = function_universe(c, f)
        for a, b in d.for_function(f.name):
            assert a in universe and b in universe
            assert d.dep(f.name, b, a)


STATEMENTS = [
    "x = y + a;", "y = x;", "z = 1;", "m[b] = z;", "x = m[msg.sender];",
    "require(x <= y);", "if (a > 0) { z = x; }", "if (b == address(0)) { return; }",
    "t = a;", "t = y;", "x = t;", "if (z == 0) { revert(); } else { y = a; }",
]


def _program(body: list[str]) -> str:
    # `t` is declared up front so statements mentioning it always type-check
    return ("contract C { uint x; uint y; uint z; mapping(address => uint) m; "
            "function f(uint a, address b) public { uint t = 0; " + " ".join(body) + " } }")


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from(STATEMENTS), max_size=6), st.sampled_from(STATEMENTS), st.data())
def test_deps_monotone_under_statement_insertion(body, extra, data):
    pos = data.draw(st.integers(0, len(body)))
    before = compute_deps(parse_contract(_program(body))).for_function("f")
    after = compute_deps(parse_contract(_program(body[:pos] + [extra] + body[pos:]))).for_function("f")
    assert before <= after
