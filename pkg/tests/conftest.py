import pytest

from invgen.corpus import ground_truth, load
from invgen.interp import Address, generate_history, initial_state, replay_history, successful
from invgen.pipeline import Config, infer_from_pool, run_inference
from invgen.spec.parser import parse_spec

import criteria
from running_example import pool

A = Address


def history(name: str, n: int, seed: int):
    c = load(name)
    return c, replay_history(c, initial_state(c), generate_history(c, n, seed))


@pytest.fixture(scope="session")
def mini():
    return load("erc20_mini")


@pytest.fixture(scope="session")
def s0():
    return {"totalSupply": 100, "balances": {A(1): 60, A(2): 40}, "allows": {A(1): {A(2): 10}}}


@pytest.fixture(scope="session")
def seed7(mini):
    """The pinned 200-call erc20_mini history (all records)."""
    return replay_history(mini, initial_state(mini), generate_history(mini, 200, 7))


@pytest.fixture(scope="session")
def seed7_ok(seed7):
    return successful(seed7)


@pytest.fixture(scope="session")
def mini_run(mini, seed7):
    return run_inference(mini, seed7, Config())


@pytest.fixture(scope="session")
def table_run(mini, seed7_ok):
    """The later stages run on the hand-classified pool of the worked example."""
    likely, partial = pool(mini)
    return infer_from_pool(mini, seed7_ok, likely, partial, Config())


@pytest.fixture(scope="session")
def mini_truth(mini):
    return parse_spec(ground_truth("erc20_mini"), mini)


_RUNS: dict = {}


@pytest.fixture(scope="session")
def corpus_run():
    """Memoised full inference per corpus contract on a 200-call seed-7 history."""
    def get(name: str):
        if name not in _RUNS:
            c, recs = history(name, 200, 7)
            _RUNS[name] = (c, recs, run_inference(c, recs, Config()))
        return _RUNS[name]
    return get



def pytest_terminal_summary(terminalreporter):
    if not criteria.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in criteria.lines():
        terminalreporter.write_line(line)
