"""JSON Lines encoding of execution records."""

from __future__ import annotations

import json
from typing import IO, Any, Optional

from .interp import Address, Call, ExecutionRecord, TraceSet, check_value
from .lang import ast as A

FIELDS = ("args", "block", "function", "post", "pre", "sender", "status", "tx")


class TraceParseError(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TraceSchemaError(Exception):
    def __init__(self, message: str, line: int = 0):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def _key(k: Any) -> str:
    if isinstance(k, Address):
        return repr(k)
    if isinstance(k, bool):
        return "true" if k else "false"
    return str(k)


def encode_value(v: Any) -> Any:
    match v:
        case Address():
            return repr(v)
        case bool():
            return v
        case int():
            return str(v)
        case str():
            return v
        case list():
            return [encode_value(x) for x in v]
        case dict():
            return {_key(k): encode_value(x) for k, x in v.items()}
    raise TypeError(f"cannot encode {v!r}")


def encode_record(r: ExecutionRecord) -> str:
    obj = {
        "tx": r.tx_id,
        "status": r.status,
        "sender": repr(r.call.sender),
        "block": r.call.block_number,
        "function": r.call.function,
        "args": encode_value(r.call.args),
        "pre": encode_value(r.pre),
        "post": encode_value(r.post),
    }
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def encode_traces(traces: TraceSet, destination: IO[str]) -> None:
    for r in traces:
        destination.write(encode_record(r) + "\n")


def encode_calls(calls: list[Call], destination: IO[str]) -> None:
    """Call lists (histories) use the same layout without states or status."""
    for c in calls:
        obj = {"sender": repr(c.sender), "block": c.block_number, "function": c.function,
               "args": encode_value(c.args)}
        destination.write(json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n")


# -- decoding ------------------------------------------------------------------

def _guess(v: Any) -> Any:
    """Untyped decoding: 'a<k>' is an address, digit strings are integers."""
    match v:
        case bool():
            return v
        case str() if v[:1] == "a" and v[1:].isdigit():
            return Address(int(v[1:]))
        case str() if v.lstrip("-").isdigit():
            return int(v)
        case str():
            return v
        case list():
            return [_guess(x) for x in v]
        case dict():
            return {_guess(k) if k not in ("true", "false") else k == "true": _guess(x) for k, x in v.items()}
    raise ValueError(f"unexpected JSON value {v!r}")


def _typed(v: Any, ty: A.Type, contract: A.ContractAst, where: str) -> Any:
    def bad():
        return TraceSchemaError(f"{where}: expected {ty}, got {v!r}")

    match ty:
        case A.UIntT() | A.IntT():
            if not isinstance(v, str):
                raise bad()
            try:
                return int(v)
            except ValueError:
                raise bad() from None
        case A.BoolT():
            if not isinstance(v, bool):
                raise bad()
            return v
        case A.AddressT():
            if not isinstance(v, str):
                raise bad()
            try:
                return Address.parse(v)
            except ValueError:
                raise bad() from None
        case A.StringT() | A.BytesT():
            if not isinstance(v, str):
                raise bad()
            return v
        case A.ArrayT(elem):
            if not isinstance(v, list):
                raise bad()
            return [_typed(x, elem, contract, f"{where}[{i}]") for i, x in enumerate(v)]
        case A.MappingT(key, val):
            if not isinstance(v, dict):
                raise bad()
            key_ty = A.UIntT() if isinstance(key, A.UIntT) else key
            return {_typed(k, key_ty, contract, where): _typed(x, val, contract, f"{where}[{k}]")
                    for k, x in v.items()}
        case A.StructT(name):
            if not isinstance(v, dict):
                raise bad()
            decl = contract.struct(name)
            missing = {f.name for f in decl.fields} - set(v)
            if missing:
                raise TraceSchemaError(f"{where}: missing field {sorted(missing)[0]!r}")
            return {f.name: _typed(v[f.name], f.ty, contract, f"{where}.{f.name}") for f in decl.fields}
    raise bad()


def _state(obj: Any, contract: Optional[A.ContractAst], where: str) -> dict[str, Any]:
    if not isinstance(obj, dict):
        raise TraceSchemaError(f"{where} must be an object")
    if contract is None:
        return {k: _guess(v) for k, v in obj.items()}
    names = [v.name for v in contract.state_vars]
    if sorted(obj) != sorted(names):
        extra = sorted(set(obj) ^ set(names))
        raise TraceSchemaError(f"{where}: state variables do not match the contract ({', '.join(extra)})")
    out = {}
    for v in contract.state_vars:
        out[v.name] = _typed(obj[v.name], v.ty, contract, f"{where}.{v.name}")
        if not check_value(out[v.name], v.ty, contract):
            raise TraceSchemaError(f"{where}.{v.name}: value out of range or not canonical")
    return out


def decode_record(line: str, lineno: int, contract: Optional[A.ContractAst] = None) -> ExecutionRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise TraceParseError(f"invalid JSON ({e.msg})", lineno) from None
    if not isinstance(obj, dict):
        raise TraceParseError("record must be a JSON object", lineno)
    missing = [f for f in FIELDS if f not in obj]
    if missing:
        raise TraceParseError(f"missing field(s) {', '.join(missing)}", lineno)
    if obj["status"] not in ("success", "reverted"):
        raise TraceParseError(f"bad status {obj['status']!r}", lineno)
    if not isinstance(obj["tx"], int) or not isinstance(obj["block"], int):
        raise TraceParseError("tx and block must be integers", lineno)
    try:
        sender = Address.parse(obj["sender"])
    except (ValueError, TypeError):
        raise TraceParseError(f"bad sender {obj['sender']!r}", lineno) from None
    fname = obj["function"]
    args_obj = obj["args"]
    if not isinstance(args_obj, dict):
        raise TraceParseError("args must be an object", lineno)
    try:
        if contract is None:
            args = {k: _guess(v) for k, v in args_obj.items()}
        else:
            f = contract.function(fname)
            if f is None:
                raise TraceSchemaError(f"unknown function {fname!r}")
            args = {}
            for p in f.params:
                if p.name not in args_obj:
                    raise TraceSchemaError(f"{fname}: missing argument {p.name!r}")
                args[p.name] = _typed(args_obj[p.name], p.ty, contract, f"args.{p.name}")
            extra = set(args_obj) - {p.name for p in f.params}
            if extra:
                raise TraceSchemaError(f"{fname}: unexpected argument {sorted(extra)[0]!r}")
        pre = _state(obj["pre"], contract, "pre")
        post = _state(obj["post"], contract, "post")
    except TraceSchemaError as e:
        raise TraceSchemaError(str(e), lineno) from None
    except (ValueError, TypeError) as e:
        raise TraceParseError(str(e), lineno) from None
    call = Call(fname, args, sender, obj["block"])
    return ExecutionRecord(obj["tx"], pre, call, post, obj["status"])


def decode_traces(source: IO[str], contract: Optional[A.ContractAst] = None) -> TraceSet:
    records: TraceSet = []
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        rec = decode_record(line, lineno, contract)
        if records and rec.tx_id <= records[-1].tx_id:
            raise TraceParseError("tx ids must be strictly increasing", lineno)
        records.append(rec)
    return records


def decode_calls(source: IO[str], contract: Optional[A.ContractAst] = None) -> list[Call]:
    calls = []
    for lineno, line in enumerate(source, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            sender = Address.parse(obj["sender"])
            fname = obj["function"]
            raw = obj["args"]
            block = obj.get("block", lineno)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise TraceParseError(f"bad call record ({e})", lineno) from None
        if contract is None:
            args = {k: _guess(v) for k, v in raw.items()}
        else:
            f = contract.function(fname)
            if f is None:
                raise TraceSchemaError(f"unknown function {fname!r}", lineno)
            try:
                args = {p.name: _typed(raw[p.name], p.ty, contract, f"args.{p.name}") for p in f.params}
            except KeyError as e:
                raise TraceSchemaError(f"{fname}: missing argument {e.args[0]!r}", lineno) from None
        calls.append(Call(fname, args, sender, block))
    return calls
