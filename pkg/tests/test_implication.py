import itertools

from invgen.detect import Candidate
from invgen.implication import TraceScreen, find_implications, weaken_implications
from invgen.lang import parse_contract
from invgen.lang.deps import compute_deps
from invgen.spec import parse_spec, parse_statement, print_expr
from invgen.spec import ast as S
from invgen.verify.queries import YES, entails
from running_example import PARTIAL_TEXT, STEP2 as TABLE_STEP2, STEP3 as TABLE_STEP3

LEFTOVER = "Requires transferFrom: to != a0\n"
PARTIALS = PARTIAL_TEXT


def cands(text, contract):
    return [Candidate(s.scope, s.body) for s in parse_spec(text, contract)]


def ensures(body, contract, fn="transferFrom"):
    s = parse_statement(f"Ensures {fn}: {body}", contract)
    return Candidate(s.scope, s.body)


def bodies(cs):
    return {c.id.split(": ", 1)[1] for c in cs}


def test_running_example_pairs(mini):
    out = find_implications(cands(LEFTOVER, mini), cands(PARTIALS, mini), compute_deps(mini))
    assert set(TABLE_STEP2) <= bodies(out)
    # independent count: every entry-only premise against every update predicate, minus independent pairs
    deps = compute_deps(mini)
    pool = cands(LEFTOVER + PARTIALS, mini)
    premises = [c.predicate.expr for c in pool if S.POST not in S.phases(c.predicate)]
    updates = [c.predicate.expr for c in pool if S.mentions_post(c.predicate)]
    expected = {f"{print_expr(a)} ==> {print_expr(b)}" for a, b in itertools.product(premises, updates)
                if any(deps.dep("transferFrom", x, y) for x in S.variables(a) for y in S.variables(b))}
    assert bodies(out) == expected and len(out) == 15
    assert all(c.origin == "implication" and c.scope == S.Scope(S.ENSURES, "transferFrom") for c in out)


TWO = parse_contract("contract C { uint x; uint y; function f(uint a) public { x = a; y = y + 1; } }")


def test_independent_pair_is_deleted():
    deps = compute_deps(TWO)
    pool = [ensures("old(x) > 0", TWO, "f"), ensures("a > 0", TWO, "f"),
            ensures("y == old(y)", TWO, "f"), ensures("x == old(x)", TWO, "f")]
    got = bodies(find_implications([], pool, deps))
    assert "old(x) > 0 ==> y == old(y)" not in got
    assert "a > 0 ==> x == old(x)" in got


def test_empty_inputs(mini):
    assert find_implications([], [], compute_deps(mini)) == []


def test_contract_scope_is_ignored(mini):
    inv = cands("ContractInv totalSupply == SumMap(balances)\n", mini)
    assert find_implications(inv, [], compute_deps(mini)) == []


def test_weakening_of_the_running_example(mini):
    failed = [ensures(b, mini) for b in TABLE_STEP2 if not b.startswith("to != a0 ==> allows")]
    out = weaken_implications(failed, mini)
    got = bodies(out)
    assert set(TABLE_STEP3) <= got
    assert all(c.origin == "weakened" for c in out)


def test_disjoining_complementary_consequences_is_blocked():
    failed = [ensures("a > 0 ==> x == old(x)", TWO, "f"), ensures("a > 0 ==> x != old(x)", TWO, "f")]
    assert weaken_implications(failed, TWO) == []


def test_conjoining_complementary_premises_is_blocked():
    failed = [ensures("a > 0 ==> x == old(x)", TWO, "f"), ensures("a <= 0 ==> x == old(x)", TWO, "f")]
    assert weaken_implications(failed, TWO) == []


def test_weakened_candidates_follow_from_a_parent(mini):
    failed = [ensures(b, mini) for b in TABLE_STEP2]
    scope = S.Scope(S.ENSURES, "transferFrom")
    for c in weaken_implications(failed, mini):
        assert any(entails(p.predicate, c.predicate, mini, scope).answer == YES for p in failed), c.id


def test_weakening_never_repeats(mini):
    failed = [ensures(b, mini) for b in TABLE_STEP2]
    seen: set[str] = set()
    first = weaken_implications(failed, mini, seen)
    before = set(seen)
    again = weaken_implications(first, mini, seen)
    assert not {c.id for c in again} & before
    # no permutation of an earlier conjunction or disjunction comes back
    fresh = weaken_implications(first, mini)
    assert not {c.id for c in fresh} & ({c.id for c in first} | {c.id for c in failed})


def test_trace_screen_drops_refuted_combinations(mini, seed7_ok):
    failed = [ensures(b, mini) for b in TABLE_STEP2]
    screen = TraceScreen(seed7_ok)
    for c in weaken_implications(failed, mini, screen=screen):
        assert not screen.refuted(c)

