"""Command-line front end: parse, run, infer, eval, check, mutate."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .detect import EmptyTrace
from .interp import InterpError, generate_history, initial_state, replay_history
from .lang import ContractError, parse_contract, print_contract
from .mutation import mutation_test
from .pipeline import Config, candidates_from_spec, check_trace, evaluate, run_inference
from .spec.evaluate import ScopeMismatch
from .spec.parser import SpecError, parse_spec
from .traceio import TraceParseError, TraceSchemaError, decode_calls, decode_traces, encode_calls, encode_traces
from .verify.backends import BACKENDS, BackendConfig, BackendUnavailable
from .verify.houdini import AssertionViolation

# failures reported as a one-line message with exit status 1
EXPECTED_ERRORS = (ContractError, SpecError, TraceParseError, TraceSchemaError, EmptyTrace, InterpError,
                   BackendUnavailable, AssertionViolation, ScopeMismatch, OSError, ValueError)


def _contract(args):
    return parse_contract(Path(args.contract).read_text(encoding="utf-8"), width=args.width)


def _specs(path: str, contract):
    return parse_spec(Path(path).read_text(encoding="utf-8"), contract)


def _traces(path: str, contract):
    with open(path, encoding="utf-8") as fh:
        return decode_traces(fh, contract)


def _write(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _backend(args) -> BackendConfig:
    return BackendConfig(backend=args.backend, timeout=args.timeout, solver=args.solver)


def cmd_parse(args) -> int:
    sys.stdout.write(print_contract(_contract(args)))
    return 0


def cmd_run(args) -> int:
    contract = _contract(args)
    if args.calls:
        with open(args.calls, encoding="utf-8") as fh:
            calls = decode_calls(fh, contract)
    else:
        calls = generate_history(contract, args.generate, args.seed, addresses=args.addresses)
        if args.save_calls:
            with open(args.save_calls, "w", encoding="utf-8") as fh:
                encode_calls(calls, fh)
    records = replay_history(contract, initial_state(contract), calls)
    if args.out in (None, "-"):
        encode_traces(records, sys.stdout)
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            encode_traces(records, fh)
    ok = sum(r.ok for r in records)
    print(f"{len(records)} records, {ok} successful", file=sys.stderr)
    return 0


def cmd_infer(args) -> int:
    contract = _contract(args)
    config = Config(min_support=args.min_support, max_weaken_iters=args.max_weaken_iters,
                    backend=_backend(args), width=args.width)
    result = run_inference(contract, _traces(args.traces, contract), config)
    _write(args.out, result.to_spec())
    print(f"{len(result.invariants)} invariants ({len(result.verified)} verified before suppression, "
          f"{result.iterations} weakening iterations)", file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    contract = _contract(args)
    invs = candidates_from_spec(_specs(args.invs, contract))
    truth = _specs(args.ground_truth, contract)
    report = evaluate(invs, truth, _traces(args.traces, contract), contract, _backend(args))
    _write(args.report, json.dumps(report.to_json(), indent=2) + "\n")
    print(f"precision {report.precision:.3f}  adjusted recall {report.recall_adjusted:.3f}", file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    contract = _contract(args)
    invs = candidates_from_spec(_specs(args.invs, contract))
    violations = check_trace(invs, _traces(args.traces, contract))
    for v in violations:
        print(f"tx {v.tx_id}: {v.invariant}")
    return 1 if violations else 0


def cmd_mutate(args) -> int:
    contract = _contract(args)
    invs = candidates_from_spec(_specs(args.invs, contract))
    if args.history:
        with open(args.history, encoding="utf-8") as fh:
            calls = decode_calls(fh, contract)
    else:
        calls = generate_history(contract, args.generate, args.seed, addresses=args.addresses)
    truth = _specs(args.ground_truth, contract) if args.ground_truth else ()
    report = mutation_test(contract, invs, calls, truth, _backend(args))
    _write(args.report, json.dumps(report.to_json(), indent=2) + "\n")
    print(f"{report.killed}/{report.total} mutants killed ({report.kill_rate:.1%})", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="invgen", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def command(name: str, handler, help: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help)
        p.add_argument("contract", help="contract source (.mc)")
        p.add_argument("--width", type=int, default=256, help="integer width in bits")
        p.set_defaults(handler=handler)
        return p

    def backend_opts(p: argparse.ArgumentParser) -> None:
        p.add_argument("--backend", choices=BACKENDS, default="builtin")
        p.add_argument("--solver", help="SMT solver binary (default: $MINISOLVER)")
        p.add_argument("--timeout", type=float, default=10.0, help="seconds per query")

    def history_opts(p: argparse.ArgumentParser) -> None:
        p.add_argument("--generate", type=int, default=200, metavar="N", help="generate N random calls")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--addresses", type=int, default=4, help="size of the address pool")

    command("parse", cmd_parse, "type-check a contract and print it")

    p = command("run", cmd_run, "execute calls and write execution records")
    p.add_argument("--calls", help="JSON-lines call file (otherwise calls are generated)")
    history_opts(p)
    p.add_argument("--save-calls", help="also write the generated calls here")
    p.add_argument("--out", help="trace file (default: stdout)")

    p = command("infer", cmd_infer, "infer verified invariants from traces")
    p.add_argument("--traces", required=True)
    backend_opts(p)
    p.add_argument("--min-support", type=int, default=3)
    p.add_argument("--max-weaken-iters", type=int, default=4)
    p.add_argument("--out", help=".spec output (default: stdout)")

    p = command("eval", cmd_eval, "precision and adjusted recall against ground truth")
    p.add_argument("--invs", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--traces", required=True)
    backend_opts(p)
    p.add_argument("--report", help="JSON report (default: stdout)")

    p = command("check", cmd_check, "report invariant violations in traces")
    p.add_argument("--invs", required=True)
    p.add_argument("--traces", required=True)

    p = command("mutate", cmd_mutate, "mutation testing against inferred invariants")
    p.add_argument("--invs", required=True)
    p.add_argument("--history", help="JSON-lines call file (otherwise calls are generated)")
    history_opts(p)
    p.add_argument("--ground-truth", help="labels for kill categories")
    backend_opts(p)
    p.add_argument("--report", help="JSON report (default: stdout)")
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except EXPECTED_ERRORS as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
