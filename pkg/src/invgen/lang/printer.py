"""Canonical pretty-printer; ``parse_contract(print_contract(c)) == c``."""

from __future__ import annotations

from . import ast as A

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, ">": 4, "<=": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6}
_INDENT = "    "


def print_type(t: A.Type) -> str:
    return str(t)


def print_expr(e: A.Expr, prec: int = 0) -> str:
    match e:
        case A.Num(value):
            return str(value)
        case A.BoolLit(value):
            return "true" if value else "false"
        case A.AddrLit(index):
            return f"address({index})"
        case A.StrLit(value):
            return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        case A.Name(id):
            return id
        case A.MsgSender():
            return "msg.sender"
        case A.BlockNumber():
            return "block.number"
        case A.Index(base, index):
            return f"{print_expr(base, 9)}[{print_expr(index)}]"
        case A.Member(base, field):
            return f"{print_expr(base, 9)}.{field}"
        case A.Length(base):
            return f"{print_expr(base, 9)}.length"
        case A.BinOp(op, left, right):
            p = _PREC[op]
            # left-associative: the right operand needs a strictly tighter binding
            text = f"{print_expr(left, p)} {op} {print_expr(right, p + 1)}"
            return f"({text})" if p < prec else text
        case A.UnOp(op, operand):
            text = f"{op}{print_expr(operand, 8)}"
            return f"({text})" if prec > 8 else text
        case A.Unchecked(inner):
            return f"unchecked({print_expr(inner)})"
        case A.Cast(target, inner):
            return f"{print_type(target)}({print_expr(inner)})"
        case A.Call(func, args):
            return f"{func}({', '.join(print_expr(a) for a in args)})"
    raise TypeError(f"cannot print {e!r}")


def _simple(s: A.Stmt) -> str:
    match s:
        case A.LocalDecl(ty, name, init):
            text = f"{print_type(ty)} {name}"
            return text if init is None else f"{text} = {print_expr(init)}"
        case A.Assign(target, value):
            return f"{print_expr(target)} = {print_expr(value)}"
        case A.ExprStmt(call):
            return print_expr(call)
    raise TypeError(f"not a simple statement: {s!r}")


def print_stmts(stmts, depth: int) -> list[str]:
    pad = _INDENT * depth
    lines: list[str] = []
    for s in stmts:
        match s:
            case A.If(cond, then, orelse):
                lines.append(f"{pad}if ({print_expr(cond)}) {{")
                lines += print_stmts(then, depth + 1)
                if orelse:
                    lines.append(f"{pad}}} else {{")
                    lines += print_stmts(orelse, depth + 1)
                lines.append(f"{pad}}}")
            case A.For(init, cond, update, body):
                i = _simple(init) if init is not None else ""
                u = _simple(update) if update is not None else ""
                lines.append(f"{pad}for ({i}; {print_expr(cond)}; {u}) {{")
                lines += print_stmts(body, depth + 1)
                lines.append(f"{pad}}}")
            case A.Require(cond):
                lines.append(f"{pad}require({print_expr(cond)});")
            case A.Assert(cond):
                lines.append(f"{pad}assert({print_expr(cond)});")
            case A.Revert():
                lines.append(f"{pad}revert();")
            case A.Return(value):
                lines.append(f"{pad}return;" if value is None else f"{pad}return {print_expr(value)};")
            case _:
                lines.append(f"{pad}{_simple(s)};")
    return lines


def _function(f: A.FunctionDecl, depth: int) -> list[str]:
    pad = _INDENT * depth
    params = ", ".join(f"{print_type(p.ty)} {p.name}" for p in f.params)
    if f.name == "constructor":
        head = f"{pad}constructor({params})"
    else:
        head = f"{pad}function {f.name}({params}) {f.visibility}"
        if f.returns is not None:
            head += f" returns ({print_type(f.returns)})"
    return [head + " {"] + print_stmts(f.body, depth + 1) + [f"{pad}}}"]


def print_contract(c: A.ContractAst) -> str:
    lines = [f"contract {c.name} {{"]
    for s in c.structs:
        lines.append(f"{_INDENT}struct {s.name} {{")
        for fld in s.fields:
            lines.append(f"{_INDENT * 2}{print_type(fld.ty)} {fld.name};")
        lines.append(f"{_INDENT}}}")
    for v in c.state_vars:
        init = "" if v.init is None else f" = {print_expr(v.init)}"
        lines.append(f"{_INDENT}{print_type(v.ty)} {v.name}{init};")
    if c.constructor is not None:
        lines += _function(c.constructor, 1)
    for f in c.functions:
        lines += _function(f, 1)
    lines.append("}")
    return "\n".join(lines) + "\n"
