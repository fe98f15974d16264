import dataclasses

import pytest

from invgen.corpus import NAMES, load
from invgen.interp import generate_history
from invgen.lang import parse_contract
from invgen.mutation import OPERATORS, generate_mutants, mutation_test
from invgen.pipeline import candidates_from_spec
from invgen.spec import parse_spec

SUM = "ContractInv SumMap(balances) == totalSupply"


def node_diff(a, b) -> int:
    """Number of minimal differing subtrees between two ASTs."""
    if a == b:
        return 0
    if type(a) is not type(b):
        return 1
    if dataclasses.is_dataclass(a):
        return sum(node_diff(getattr(a, f.name), getattr(b, f.name)) for f in dataclasses.fields(a))
    if isinstance(a, tuple):
        if len(a) == len(b):
            return sum(node_diff(x, y) for x, y in zip(a, b))
        shorter, longer = sorted((a, b), key=len)
        # a deleted statement is one missing element
        return 1 if len(longer) == len(shorter) + 1 and any(
            longer[:i] + longer[i + 1:] == shorter for i in range(len(longer))) else 2
    return 1


@pytest.fixture(scope="module")
def calls(mini):
    return generate_history(mini, 200, 7)


@pytest.fixture(scope="module")
def report(mini, mini_run, calls, mini_truth):
    return mutation_test(mini, mini_run.invariants, calls, mini_truth)


@pytest.mark.parametrize("name", NAMES)
def test_each_mutant_changes_one_node(name):
    c = load(name)
    mutants = generate_mutants(c)
    assert mutants
    for m in mutants:
        assert m.operator in OPERATORS
        assert node_diff(c, m.contract) == 1, m.id
        assert m.contract.constructor == c.constructor


def test_catalog_coverage():
    c = parse_contract("contract C { uint x; bool b; function f(uint a) public {"
                       " require(a > 0); if (!b) { x = a + 1; } } }")
    ops = {m.operator for m in generate_mutants(c)}
    assert ops == set(OPERATORS)


def test_mutant_ids_are_unique(mini):
    ids = [m.id for m in generate_mutants(mini)]
    assert len(ids) == len(set(ids))


def test_generation_is_deterministic(mini):
    assert [m.id for m in generate_mutants(mini)] == [m.id for m in generate_mutants(mini)]


def test_flipped_debit_is_caught_by_the_sum_invariant(mini, calls):
    invs = candidates_from_spec(parse_spec(SUM + "\n", mini))
    rep = mutation_test(mini, invs, calls)
    flipped = [o for o in rep.outcomes if o.operator == "binary-op-replacement" and o.description == "- -> +"
               and o.location.startswith("25:")]
    assert len(flipped) == 1
    assert flipped[0].status == "killed" and flipped[0].killed_by == [SUM]


def test_guard_negation_is_killed(report):
    negated = [o for o in report.outcomes if o.description == "negate guard"]
    assert negated and all(o.status == "killed" for o in negated)


def test_dead_code_survives(report):
    dead = [o for o in report.outcomes if o.location.startswith("29:")]
    assert dead and all(o.status == "survived" for o in dead)


def test_kill_categories(report):
    cats = report.categories()
    assert cats.get("contract-inv", 0) > 0 and cats.get("pre/post", 0) > 0
    for o in report.outcomes:
        if o.status == "killed" and not o.assertion:
            assert o.killed_by and o.categories


def test_report_is_reproducible(mini, mini_run, calls, mini_truth, report):
    again = mutation_test(mini, mini_run.invariants, calls, mini_truth)
    assert again.to_json() == report.to_json()


def test_report_totals(report):
    data = report.to_json()
    assert data["total"] == len(report.outcomes) - data["skipped"]
    assert sum(v["killed"] for v in data["by_operator"].values()) == data["killed"]


def test_assertion_failure_kills():
    c = parse_contract("contract C { uint x; function f(uint a) public { x = a; assert(x == a); } }")
    hist = generate_history(c, 20, 1)
    rep = mutation_test(c, [], hist)
    assert any(o.status == "killed" and o.assertion for o in rep.outcomes)
