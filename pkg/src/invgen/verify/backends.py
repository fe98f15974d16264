"""Discharging verification queries: built-in prover, bounded falsifier, external SMT solver."""

from __future__ import annotations

import itertools
import os
import random
import re
import shutil
import subprocess
from dataclasses import dataclass, field
from typing import Optional

from . import logic as T
from .lia import check_sat
from .logic import Formula
from .vcgen import ADDRESS_HI, VerificationQuery

PROVED, REFUTED, UNKNOWN = "proved", "refuted", "unknown"
BACKENDS = ("builtin", "enum", "smt")


class BackendUnavailable(Exception):
    pass


@dataclass(frozen=True)
class ProofResult:
    status: str
    model: Optional[dict[str, int]] = field(default=None, compare=False)
    reason: str = ""

    @property
    def proved(self) -> bool:
        return self.status == PROVED

    @property
    def refuted(self) -> bool:
        return self.status == REFUTED


@dataclass(frozen=True)
class BackendConfig:
    backend: str = "builtin"
    timeout: float = 10.0
    loop_bound: int = 4
    addresses: int = 4
    samples: int = 400
    solver: Optional[str] = None
    seed: int = 0

    def __post_init__(self):
        if self.loop_bound < 1:
            raise ValueError("loop bound must be at least 1")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {', '.join(BACKENDS)}")


def named_model(model: T.Model) -> dict[str, int]:
    return dict(sorted(model.as_dict().items()))


def discharge(query: VerificationQuery, config: BackendConfig) -> ProofResult:
    """Decide whether the assumptions of ``query`` entail its obligation."""
    if query.truncated:
        # only reachability of the unexplored loop continuation is decidable here
        res = _decide(list(query.assumptions), config)
        if res.status == REFUTED:
            return ProofResult(UNKNOWN, reason="loop-bound")
        if res.status == PROVED:
            return res
        return ProofResult(UNKNOWN, reason=res.reason)
    return _decide(list(query.assumptions) + [T.not_(query.obligation)], config)


def check_formulas(formulas: list[Formula], config: BackendConfig) -> ProofResult:
    """PROVED when the conjunction is unsatisfiable, REFUTED with a witness otherwise."""
    return _decide(formulas, config)


def _decide(formulas: list[Formula], config: BackendConfig) -> ProofResult:
    match config.backend:
        case "builtin":
            r = check_sat(formulas, timeout=config.timeout)
            if r.status == "unsat":
                return ProofResult(PROVED)
            if r.status == "sat":
                return ProofResult(REFUTED, named_model(r.model))
            return ProofResult(UNKNOWN, reason=r.reason)
        case "enum":
            return _falsify(formulas, config)
        case "smt":
            return _smt(formulas, config)
    raise ValueError(config.backend)


# ---------------------------------------------------------------------------
# Bounded falsification
# ---------------------------------------------------------------------------

def _domain(lo: Optional[int], hi: Optional[int], addresses: int, maxvalue: int) -> list[int]:
    if (lo, hi) == (0, 1):
        return [0, 1]
    if (lo, hi) == (0, ADDRESS_HI):
        return list(range(addresses + 1))
    top = hi if hi is not None else maxvalue
    bottom = lo if lo is not None else -top
    corners = {bottom, bottom + 1, bottom + 2, 0, 1, 2, top - 1, top, 3, 10, 100}
    return sorted(v for v in corners if bottom <= v <= top)


def _falsify(formulas: list[Formula], config: BackendConfig) -> ProofResult:
    """Search small domains for a model; never proves anything."""
    rng = random.Random(config.seed)
    atoms: list[T.Atom] = []
    for f in formulas:
        atoms.extend(T.atoms_of(f))
    variables = {a.sk: a for a in atoms if isinstance(a, T.Var)}
    apps = {a.sk: a for a in atoms if isinstance(a, T.App)}
    maxvalue = max((a.hi for a in list(variables.values()) + list(apps.values())
                    if a.hi is not None and a.hi != ADDRESS_HI), default=(1 << 256) - 1)
    names = sorted(variables)
    domains = [_domain(variables[n].lo, variables[n].hi, config.addresses, maxvalue) for n in names]
    size = 1
    for d in domains:
        size *= len(d)
    if size <= config.samples:
        assignments = itertools.product(*domains)
    else:
        assignments = (tuple(rng.choice(d) for d in domains) for _ in range(config.samples))
    app_list = sorted(apps.values(), key=lambda a: len(a.sk))
    for values in assignments:
        for _ in range(3):
            model = T.Model(dict(zip((variables[n].name for n in names), values)))
            for a in app_list:
                key = (a.fn, tuple(model.lin(x) for x in a.args))
                if key not in model.tables:
                    pool = _domain(a.lo, a.hi, config.addresses, maxvalue)
                    pool = pool + [v for v in model.tables.values() if (a.lo is None or v >= a.lo) and (a.hi is None or v <= a.hi)]
                    model.tables[key] = rng.choice(pool)
            if all(model.formula(f) for f in formulas):
                return ProofResult(REFUTED, named_model(model))
    return ProofResult(UNKNOWN, reason="search-exhausted")


# ---------------------------------------------------------------------------
# SMT-LIB 2 over a subprocess
# ---------------------------------------------------------------------------

def solver_path(config: BackendConfig) -> str:
    path = config.solver or os.environ.get("MINISOLVER")
    if not path:
        raise BackendUnavailable("no SMT solver configured (use --solver or MINISOLVER)")
    found = shutil.which(path)
    if found is None:
        raise BackendUnavailable(f"SMT solver {path!r} not found")
    return found


def _sym(name: str) -> str:
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def _num(v: int) -> str:
    return str(v) if v >= 0 else f"(- {-v})"


class _SmtWriter:
    def __init__(self):
        self.nonlinear = False
        self.vars: dict[str, T.Var] = {}
        self.funs: dict[str, int] = {}
        self.apps: dict[str, T.App] = {}

    def lin(self, l: T.Lin) -> str:
        parts = [self.term(a) if c == 1 else f"(* {_num(c)} {self.term(a)})" for a, c in l.terms]
        if l.const or not parts:
            parts.append(_num(l.const))
        return parts[0] if len(parts) == 1 else f"(+ {' '.join(parts)})"

    def term(self, a: T.Atom) -> str:
        match a:
            case T.Var(name):
                self.vars[name] = a
                return _sym(name)
            case T.App(fn, args):
                self.funs[fn] = len(args)
                self.apps[a.sk] = a
                if not args:
                    return _sym(fn)
                return f"({_sym(fn)} {' '.join(self.lin(x) for x in args)})"
            case T.Ite(c, t, e):
                return f"(ite {self.formula(c)} {self.lin(t)} {self.lin(e)})"
            case T.NMul(x, y):
                self.nonlinear = True
                return f"(* {self.lin(x)} {self.lin(y)})"
            case T.IDiv(x, y):
                if not y.is_const:
                    self.nonlinear = True
                n, d = self.lin(x), self.lin(y)
                # truncating division; division by zero yields zero
                return (f"(ite (= {d} 0) 0 (ite (>= {n} 0) (ite (> {d} 0) (div {n} {d}) (- (div {n} (- {d}))))"
                        f" (ite (> {d} 0) (- (div (- {n}) {d})) (div (- {n}) (- {d})))))")
        raise TypeError(a)

    def formula(self, f: Formula) -> str:
        match f:
            case T.BoolConst(value=v):
                return "true" if v else "false"
            case T.Cmp("<=", l):
                return f"(<= {self.lin(l)} 0)"
            case T.Cmp("==", l):
                return f"(= {self.lin(l)} 0)"
            case T.Cmp("!=", l):
                return f"(not (= {self.lin(l)} 0))"
            case T.And(args):
                return f"(and {' '.join(self.formula(x) for x in args)})"
            case T.Or(args):
                return f"(or {' '.join(self.formula(x) for x in args)})"
        raise TypeError(f)

    def script(self, formulas: list[Formula]) -> tuple[str, list[tuple[str, str]]]:
        body = [f"(assert {self.formula(f)})" for f in formulas]
        bounds = []
        for atom in list(self.vars.values()) + list(self.apps.values()):
            t = self.term(atom)
            if atom.lo is not None:
                bounds.append(f"(assert (>= {t} {_num(atom.lo)}))")
            if atom.hi is not None:
                bounds.append(f"(assert (<= {t} {_num(atom.hi)}))")
        logic = ("QF_UFNIA" if self.nonlinear else "QF_UFLIA") if self.funs else ("QF_NIA" if self.nonlinear else "QF_LIA")
        decls = [f"(declare-const {_sym(n)} Int)" for n in sorted(self.vars)]
        decls += [f"(declare-fun {_sym(fn)} ({' '.join(['Int'] * k)}) Int)" for fn, k in sorted(self.funs.items())]
        probes = [(v.name, self.term(v)) for v in self.vars.values()]
        probes += [(a.sk, self.term(a)) for a in self.apps.values()]
        text = "\n".join([f"(set-logic {logic})", *decls, *body, *bounds, "(check-sat)"])
        if probes:
            text += f"\n(get-value ({' '.join(t for _, t in probes)}))"
        return text + "\n(exit)\n", probes


def to_smtlib(formulas: list[Formula]) -> str:
    return _SmtWriter().script(formulas)[0]


_SEXP = re.compile(r"\(|\)|\|[^|]*\||[^\s()]+")


def _parse_sexp(text: str):
    stack: list[list] = [[]]
    for tok in _SEXP.findall(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    return stack[0]


def _int_value(v) -> int:
    if isinstance(v, str):
        return int(v)
    if len(v) == 2 and v[0] == "-":
        return -_int_value(v[1])
    raise ValueError(v)


def _smt(formulas: list[Formula], config: BackendConfig) -> ProofResult:
    exe = solver_path(config)
    writer = _SmtWriter()
    text, probes = writer.script(formulas)
    args = [exe]
    if os.path.basename(exe).startswith("z3"):
        args += ["-in", "-smt2"]
    else:
        args += ["--lang", "smt2", "--produce-models", "-"] if "cvc" in os.path.basename(exe) else ["-"]
    try:
        out = subprocess.run(args, input=text, capture_output=True, text=True, timeout=config.timeout).stdout
    except subprocess.TimeoutExpired:
        return ProofResult(UNKNOWN, reason="timeout")
    lines = out.strip().split("\n", 1)
    verdict = lines[0].strip() if lines else ""
    if verdict == "unsat":
        return ProofResult(PROVED)
    if verdict != "sat":
        return ProofResult(UNKNOWN, reason="timeout" if verdict == "unknown" else f"solver said {verdict!r}")
    values: dict[str, int] = {}
    if len(lines) > 1 and probes:
        pairs = _parse_sexp(lines[1])[0]
        for (name, _), pair in zip(probes, pairs):
            values[name] = _int_value(pair[1])
    model = T.Model()
    for name, _ in probes:
        if name in writer.vars:
            model.values[name] = values[name]
    for a in sorted(writer.apps.values(), key=lambda a: len(a.sk)):
        model.tables[(a.fn, tuple(model.lin(x) for x in a.args))] = values[a.sk]
    return ProofResult(REFUTED, named_model(model))
