"""Name resolution and type annotation for parsed contracts."""

from __future__ import annotations

from dataclasses import replace
from . import ast as A
from .errors import ContractTypeError, DuplicateNameError


def compatible(a: A.Type, b: A.Type) -> bool:
    if A.is_integer(a) and A.is_integer(b):
        return True
    return a == b


class _Checker:
    def __init__(self, contract: A.ContractAst):
        self.contract = contract
        self.state = {v.name: v.ty for v in contract.state_vars}
        self.structs = {s.name: {f.name: f.ty for f in s.fields} for s in contract.structs}
        self.functions = {f.name: f for f in contract.functions}
        self.uint = A.UIntT(contract.width)
        self.current: A.FunctionDecl | None = None

    def fail(self, msg: str, node) -> ContractTypeError:
        line, col = getattr(node, "pos", (0, 0))
        return ContractTypeError(msg, line, col)

    # -- types --------------------------------------------------------------

    def check_type(self, ty: A.Type, node, *, in_mapping: bool = False) -> None:
        match ty:
            case A.MappingT(key, value):
                if not isinstance(key, (A.AddressT, A.UIntT)):
                    raise self.fail(f"mapping key must be address or uint, not {key}", node)
                if A.mapping_depth(ty) > 2:
                    raise self.fail("mapping nesting deeper than 2 is not supported", node)
                self.check_type(value, node, in_mapping=True)
            case A.ArrayT(elem):
                self.check_type(elem, node)
            case A.StructT(name):
                if name not in self.structs:
                    raise self.fail(f"unknown type {name}", node)

    # -- declarations -------------------------------------------------------

    def contract_(self) -> A.ContractAst:
        c = self.contract
        for s in c.structs:
            names = set()
            for f in s.fields:
                if f.name in names:
                    raise DuplicateNameError(f"duplicate field {f.name!r}", *f.pos)
                names.add(f.name)
                self.check_type(f.ty, f)
                if isinstance(f.ty, (A.MappingT, A.StructT)):
                    raise self.fail("struct fields must be of primitive or array type", f)
        state_vars = []
        for v in c.state_vars:
            self.check_type(v.ty, v)
            init = None
            if v.init is not None:
                init = self.expr(v.init, {})
                if not compatible(v.ty, init.ty):
                    raise self.fail(f"cannot initialize {v.ty} with {init.ty}", v)
            state_vars.append(replace(v, init=init))
        functions = tuple(self.function(f) for f in c.functions)
        ctor = self.function(c.constructor) if c.constructor else None
        return replace(c, state_vars=tuple(state_vars), functions=functions, constructor=ctor)

    def function(self, f: A.FunctionDecl) -> A.FunctionDecl:
        env: dict[str, A.Type] = {}
        for p in f.params:
            if p.name in env or p.name in self.state:
                raise DuplicateNameError(f"parameter {p.name!r} shadows another name", *p.pos)
            self.check_type(p.ty, p)
            if isinstance(p.ty, A.MappingT):
                raise self.fail("mapping parameters are not supported", p)
            env[p.name] = p.ty
        self.current = f
        body = self.block(f.body, env)
        return replace(f, body=body)

    # -- statements ---------------------------------------------------------

    def block(self, stmts, env: dict[str, A.Type]) -> tuple[A.Stmt, ...]:
        env = dict(env)
        return tuple(self.stmt(s, env) for s in stmts)

    def stmt(self, s: A.Stmt, env: dict[str, A.Type]) -> A.Stmt:
        match s:
            case A.LocalDecl(ty, name, init):
                if name in env or name in self.state:
                    raise DuplicateNameError(f"local {name!r} shadows another name", *s.pos)
                self.check_type(ty, s)
                if isinstance(ty, A.MappingT):
                    raise self.fail("local mappings are not supported", s)
                new_init = None
                if init is not None:
                    new_init = self.expr(init, env)
                    self.require_compatible(ty, new_init, s)
                env[name] = ty
                return replace(s, init=new_init)
            case A.Assign(target, value):
                t = self.expr(target, env)
                if A.root_name(t) is None or isinstance(t, A.Length):
                    raise self.fail("invalid assignment target", s)
                if isinstance(t.ty, A.MappingT):
                    raise self.fail("cannot assign a whole mapping", s)
                v = self.expr(value, env)
                self.require_compatible(t.ty, v, s)
                return replace(s, target=t, value=v)
            case A.If(cond, then, orelse):
                c = self.expect(cond, env, A.BoolT())
                return replace(s, cond=c, then=self.block(then, env), orelse=self.block(orelse, env))
            case A.For(init, cond, update, body):
                inner = dict(env)
                new_init = self.stmt(init, inner) if init is not None else None
                c = self.expect(cond, inner, A.BoolT())
                new_update = self.stmt(update, inner) if update is not None else None
                return replace(s, init=new_init, cond=c, update=new_update, body=self.block(body, inner))
            case A.Require(cond) | A.Assert(cond):
                return replace(s, cond=self.expect(cond, env, A.BoolT()))
            case A.Revert():
                return s
            case A.Return(value):
                rt = self.current.returns
                if value is None:
                    return s
                if rt is None:
                    raise self.fail("function does not return a value", s)
                v = self.expr(value, env)
                self.require_compatible(rt, v, s)
                return replace(s, value=v)
            case A.ExprStmt(call):
                return replace(s, expr=self.expr(call, env))
        raise self.fail(f"unsupported statement {type(s).__name__}", s)

    def require_compatible(self, ty: A.Type, e: A.Expr, node) -> None:
        if not compatible(ty, e.ty):
            raise self.fail(f"type mismatch: expected {ty}, got {e.ty}", node)

    def expect(self, e: A.Expr, env, ty: A.Type) -> A.Expr:
        out = self.expr(e, env)
        if not compatible(ty, out.ty):
            raise self.fail(f"expected {ty}, got {out.ty}", e)
        return out

    # -- expressions --------------------------------------------------------

    def expr(self, e: A.Expr, env: dict[str, A.Type]) -> A.Expr:
        match e:
            case A.Num():
                return replace(e, ty=self.uint)
            case A.BoolLit():
                return replace(e, ty=A.BoolT())
            case A.AddrLit():
                return replace(e, ty=A.AddressT())
            case A.StrLit():
                return replace(e, ty=A.StringT())
            case A.MsgSender():
                return replace(e, ty=A.AddressT())
            case A.BlockNumber():
                return replace(e, ty=A.UIntT(256))
            case A.Name(id):
                ty = env.get(id) or self.state.get(id)
                if ty is None:
                    raise self.fail(f"unknown name {id!r}", e)
                return replace(e, ty=ty)
            case A.Index(base, index):
                b = self.expr(base, env)
                i = self.expr(index, env)
                if isinstance(b.ty, A.MappingT):
                    if not compatible(b.ty.key, i.ty):
                        raise self.fail(f"mapping key must be {b.ty.key}, got {i.ty}", e)
                    return replace(e, base=b, index=i, ty=b.ty.value)
                if isinstance(b.ty, A.ArrayT):
                    if not A.is_integer(i.ty):
                        raise self.fail("array index must be an integer", e)
                    return replace(e, base=b, index=i, ty=b.ty.elem)
                raise self.fail(f"cannot index a value of type {b.ty}", e)
            case A.Member(base, field):
                b = self.expr(base, env)
                if not isinstance(b.ty, A.StructT):
                    raise self.fail(f"{b.ty} has no member {field!r}", e)
                fields = self.structs[b.ty.name]
                if field not in fields:
                    raise self.fail(f"struct {b.ty.name} has no member {field!r}", e)
                return replace(e, base=b, ty=fields[field])
            case A.Length(base):
                b = self.expr(base, env)
                if not isinstance(b.ty, A.ArrayT):
                    raise self.fail("'.length' applies to arrays only", e)
                return replace(e, base=b, ty=self.uint)
            case A.BinOp(op, left, right):
                return self.binop(e, op, self.expr(left, env), self.expr(right, env))
            case A.UnOp(op, operand):
                o = self.expr(operand, env)
                if op == "!":
                    if not isinstance(o.ty, A.BoolT):
                        raise self.fail("'!' needs a bool operand", e)
                    return replace(e, operand=o, ty=A.BoolT())
                if not isinstance(o.ty, A.IntT):
                    raise self.fail("unary '-' needs a signed integer operand", e)
                return replace(e, operand=o, ty=o.ty)
            case A.Unchecked(inner):
                i = self.expr(inner, env)
                if not A.is_integer(i.ty):
                    raise self.fail("unchecked() applies to integer expressions", e)
                return replace(e, expr=i, ty=i.ty)
            case A.Cast(target, inner):
                i = self.expr(inner, env)
                if not A.is_integer(i.ty):
                    raise self.fail(f"cannot convert {i.ty} to {target}", e)
                return replace(e, expr=i, ty=target)
            case A.Call(func, args):
                f = self.functions.get(func)
                if f is None:
                    raise self.fail(f"unknown function {func!r}", e)
                if len(args) != len(f.params):
                    raise self.fail(f"{func} expects {len(f.params)} arguments", e)
                new_args = []
                for a, p in zip(args, f.params):
                    ta = self.expr(a, env)
                    self.require_compatible(p.ty, ta, a)
                    new_args.append(ta)
                return replace(e, args=tuple(new_args), ty=f.returns)
        raise self.fail(f"unsupported expression {type(e).__name__}", e)

    def binop(self, e: A.BinOp, op: str, l: A.Expr, r: A.Expr) -> A.Expr:
        lt, rt = l.ty, r.ty
        if op in A.LOGIC_OPS:
            if not (isinstance(lt, A.BoolT) and isinstance(rt, A.BoolT)):
                raise self.fail(f"'{op}' needs bool operands", e)
            ty: A.Type = A.BoolT()
        elif op in ("==", "!="):
            if isinstance(lt, (A.MappingT, A.ArrayT, A.StructT)) or not compatible(lt, rt):
                raise self.fail(f"cannot compare {lt} with {rt}", e)
            ty = A.BoolT()
        elif op in A.COMPARE_OPS:
            if not (A.is_integer(lt) and A.is_integer(rt)):
                raise self.fail(f"cannot compare {lt} with {rt}", e)
            ty = A.BoolT()
        else:
            if not (A.is_integer(lt) and A.is_integer(rt)):
                raise self.fail(f"'{op}' needs integer operands, got {lt} and {rt}", e)
            ty = rt if isinstance(l, A.Num) else lt
        return replace(e, left=l, right=r, ty=ty)


def check_contract(contract: A.ContractAst) -> A.ContractAst:
    return _Checker(contract).contract_()

