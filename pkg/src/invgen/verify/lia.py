"""Decision procedure for quantifier-free linear integer arithmetic.

The search splits on if-then-else conditions and disjunctions, propagates
equalities by substitution, and decides each conjunction of linear
constraints with Fourier-Motzkin elimination (integer coefficients, gcd
tightening) followed by back-substitution and branch-and-bound.
Disequalities and the functional consistency of uninterpreted applications
are enforced lazily against candidate models.  Nonlinear products and
divisions by non-constants are abstracted by fresh variables; a model found
under abstraction is only trusted once it re-evaluates correctly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor, gcd
from typing import Optional

from . import logic as T
from .logic import FALSE, TRUE, And, App, Cmp, Formula, IDiv, Ite, Lin, Model, NMul, Or, Var


class Unknown(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass
class SatResult:
    status: str  # "sat" | "unsat" | "unknown"
    model: Optional[Model] = None
    reason: str = ""


MAX_CONSTRAINTS = 4000
MAX_BRANCH_DEPTH = 40


# ---------------------------------------------------------------------------
# Conjunctions of linear constraints
# ---------------------------------------------------------------------------

Row = tuple[tuple[tuple[str, int], ...], int]  # (sorted (atom key, coeff)), k) meaning sum + k <= 0


def _row(coeffs: dict[str, int], k: int) -> Optional[Row]:
    items = tuple(sorted((a, c) for a, c in coeffs.items() if c))
    if not items:
        return None if k <= 0 else ((), k)
    g = 0
    for _, c in items:
        g = gcd(g, c)
    if g > 1:
        items = tuple((a, c // g) for a, c in items)
        k = -((-k) // g)
    return items, k


class _Infeasible(Exception):
    pass


def _eliminate(rows: list[Row], order_hint: list[str]):
    """Fourier-Motzkin; returns the elimination trail or raises _Infeasible."""
    table: dict[tuple, int] = {}

    def put(r: Optional[Row]):
        if r is None:
            return
        items, k = r
        if not items:
            raise _Infeasible()
        old = table.get(items)
        if old is None or k > old:
            table[items] = k

    for r in rows:
        put(r)
    trail: list[tuple[str, list[Row]]] = []
    remaining = {a for items in table for a, _ in items}
    rank = {a: i for i, a in enumerate(order_hint)}
    while remaining:
        occurs: dict[str, list[int]] = {a: [0, 0] for a in remaining}
        for items in table:
            for a, c in items:
                occurs[a][0 if c > 0 else 1] += 1
        x = min(remaining, key=lambda a: (occurs[a][0] * occurs[a][1] - occurs[a][0] - occurs[a][1],
                                          rank.get(a, len(rank)), a))
        pos, negs, rest = [], [], {}
        for items, k in table.items():
            c = dict(items).get(x, 0)
            if c > 0:
                pos.append((items, k))
            elif c < 0:
                negs.append((items, k))
            else:
                rest[items] = k
        table = rest
        saved = pos + negs
        trail.append((x, saved))
        remaining.discard(x)
        for pi, pk in pos:
            pd = dict(pi)
            a = pd[x]
            for ni, nk in negs:
                nd = dict(ni)
                b = -nd[x]
                combined: dict[str, int] = {}
                for v, c in pd.items():
                    if v != x:
                        combined[v] = combined.get(v, 0) + b * c
                for v, c in nd.items():
                    if v != x:
                        combined[v] = combined.get(v, 0) + a * c
                put(_row(combined, b * pk + a * nk))
                if len(table) > MAX_CONSTRAINTS:
                    raise Unknown("timeout")
        remaining = {a for items in table for a, _ in items}
    return trail


def _back_substitute(trail) -> dict[str, Fraction]:
    values: dict[str, Fraction] = {}
    for x, saved in reversed(trail):
        lo: Optional[Fraction] = None
        hi: Optional[Fraction] = None
        for items, k in saved:
            cx = 0
            rest = Fraction(k)
            for v, c in items:
                if v == x:
                    cx = c
                else:
                    rest += c * values.get(v, 0)
            bound = -rest / cx
            if cx > 0:
                hi = bound if hi is None or bound < hi else hi
            else:
                lo = bound if lo is None or bound > lo else lo
        ilo = None if lo is None else ceil(lo)
        ihi = None if hi is None else floor(hi)
        if ilo is None and ihi is None:
            val = Fraction(0)
        elif ilo is not None and ihi is not None:
            if ilo <= ihi:
                val = Fraction(0) if ilo <= 0 <= ihi else Fraction(ilo if ilo > 0 else ihi)
            else:
                val = lo  # no integer in range: branch later
        elif ilo is not None:
            val = Fraction(max(ilo, 0))
        else:
            val = Fraction(min(ihi, 0))
        values[x] = val
    return values


def solve_rows(rows: list[Row], depth: int = 0, order_hint: Optional[list[str]] = None) -> Optional[dict[str, int]]:
    """Integer solution of the rows, or None when none exists."""
    try:
        trail = _eliminate(rows, order_hint or [])
    except _Infeasible:
        return None
    values = _back_substitute(trail)
    frac = next((v for v, x in values.items() if x.denominator != 1), None)
    if frac is None:
        return {v: int(x) for v, x in values.items()}
    if depth >= MAX_BRANCH_DEPTH:
        raise Unknown("timeout")
    val = values[frac]
    down = _row({frac: 1}, -floor(val))
    up = _row({frac: -1}, ceil(val))
    for extra in (down, up):
        sol = solve_rows(rows + [extra], depth + 1, order_hint)
        if sol is not None:
            return sol
    return None


def feasible_rows(rows: list[Row]) -> bool:
    try:
        _eliminate(rows, [])
    except _Infeasible:
        return False
    return True


# ---------------------------------------------------------------------------
# Search over formulas
# ---------------------------------------------------------------------------

def _flatten(fs) -> tuple[list[Cmp], list[Or]] | None:
    lits: dict[str, Cmp] = {}
    clauses: dict[str, Or] = {}
    stack = list(fs)
    while stack:
        f = stack.pop()
        if f is TRUE:
            continue
        if f is FALSE:
            return None
        match f:
            case And(args):
                stack.extend(args)
            case Or():
                clauses[f.sk] = f
            case Cmp():
                lits[f.sk] = f
    for l in lits.values():
        if T.not_(l).sk in lits:
            return None
    return [lits[k] for k in sorted(lits)], [clauses[k] for k in sorted(clauses)]


def _has_complex(l: Lin) -> bool:
    return any(isinstance(a, (Ite, NMul, IDiv)) for a in T.atoms_of(l))


class _Search:
    def __init__(self, timeout: float, max_nodes: int):
        self.deadline = time.monotonic() + timeout
        self.max_nodes = max_nodes
        self.nodes = 0
        self.approx = False
        self.abstractions: dict[str, Lin] = {}

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.max_nodes or time.monotonic() > self.deadline:
            raise Unknown("timeout")

    # -- helpers -------------------------------------------------------------

    def rows_of(self, lits: list[Cmp]) -> list[Row]:
        rows: list[Row] = []
        seen_atoms: dict[str, T.Atom] = {}
        for lit in lits:
            if lit.op == "!=":
                continue
            coeffs = {}
            for a, c in lit.lin.terms:
                coeffs[a.sk] = c
                seen_atoms[a.sk] = a
            r = _row(coeffs, lit.lin.const)
            if lit.op == "==":
                r2 = _row({k: -v for k, v in coeffs.items()}, -lit.lin.const)
                for rr in (r, r2):
                    if rr is not None:
                        rows.append(rr)
            elif r is not None:
                rows.append(r)
        for key, a in seen_atoms.items():
            lo, hi = T.bounds(a)
            if lo is not None:
                rows.append(((((key, -1),)), lo))
            if hi is not None:
                rows.append(((((key, 1),)), -hi))
        return rows

    def quick_infeasible(self, lits: list[Cmp]) -> bool:
        simple = [l for l in lits if not _has_complex(l.lin)]
        if not simple:
            return False
        return not feasible_rows(self.rows_of(simple))

    # -- main recursion ------------------------------------------------------

    def solve(self, fs: list[Formula], subs: list[tuple[Var, Lin]]) -> Optional[Model]:
        self.tick()
        flat = _flatten(fs)
        if flat is None:
            return None
        lits, clauses = flat

        # substitute equalities that define a variable
        for lit in lits:
            if lit.op != "==":
                continue
            for a, c in lit.lin.terms:
                if isinstance(a, Var) and c in (1, -1):
                    rest = T.sub(lit.lin, T.scale(T.atom(a), c))
                    expr = T.scale(rest, -c)
                    if any(b.sk == a.sk for b in T.atoms_of(expr)):
                        continue
                    extra: list[Formula] = []
                    if a.lo is not None:
                        extra.append(T.cmp(">=", expr, T.const(a.lo)))
                    if a.hi is not None:
                        extra.append(T.cmp("<=", expr, T.const(a.hi)))
                    rw = T.Rewriter(atom_map={a.sk: expr})
                    new = [rw.formula(f) for f in lits if f is not lit] + [rw.formula(f) for f in clauses]
                    return self.solve(new + extra, subs + [(a, expr)])

        if self.quick_infeasible(lits):
            return None

        everything = lits + clauses
        # split on the innermost if-then-else condition
        for f in everything:
            for a in T.atoms_of(f):
                if isinstance(a, Ite):
                    return self.split_ite(a.cond, everything, subs)

        # linearise divisions by constants, abstract nonlinear terms
        for f in everything:
            for a in T.atoms_of(f):
                if isinstance(a, IDiv) and a.b.is_const and a.b.const != 0:
                    return self.solve(self.linearize_div(a, everything), subs)
                if isinstance(a, (NMul, IDiv)):
                    return self.solve(self.abstract(a, everything), subs)

        if clauses:
            clause = min(clauses, key=lambda c: (len(c.args), c.sk))
            rest = [f for f in everything if f is not clause]
            for d in clause.args:
                m = self.solve(rest + [d], subs)
                if m is not None:
                    return m
            return None
        return self.final(lits, subs)

    def split_ite(self, cond: Formula, fs: list[Formula], subs) -> Optional[Model]:
        for value in (True, False):
            lit = cond if value else T.not_(cond)
            rw = T.Rewriter(formula_map={cond.sk: TRUE if value else FALSE,
                                         T.not_(cond).sk: FALSE if value else TRUE})
            new = [rw.formula(f) for f in fs] + [lit]
            m = self.solve(new, subs)
            if m is not None:
                return m
        return None

    def linearize_div(self, a: IDiv, fs: list[Formula]) -> list[Formula]:
        c = a.b.const
        sign = 1 if c > 0 else -1
        c = abs(c)
        q = T.var(f"div#{len(self.abstractions)}")
        self.abstractions[a.sk] = q
        num = a.a
        cq = T.scale(q, c)
        nonneg = T.and_(T.cmp(">=", num, T.ZERO), T.cmp("<=", cq, num), T.cmp("<=", num, T.add(cq, T.const(c - 1))))
        negative = T.and_(T.cmp("<", num, T.ZERO), T.cmp("<=", T.add(cq, T.const(-(c - 1))), num), T.cmp("<=", num, cq))
        rw = T.Rewriter(atom_map={a.sk: T.scale(q, sign)})
        return [rw.formula(f) for f in fs] + [T.or_(nonneg, negative)]

    def abstract(self, a, fs: list[Formula]) -> list[Formula]:
        self.approx = True
        v = self.abstractions.get(a.sk)
        if v is None:
            v = T.var(f"nl#{len(self.abstractions)}")
            self.abstractions[a.sk] = v
        rw = T.Rewriter(atom_map={a.sk: v})
        return [rw.formula(f) for f in fs]

    def final(self, lits: list[Cmp], subs) -> Optional[Model]:
        atoms: dict[str, T.Atom] = {}
        for l in lits:
            for a in T.atoms_of(l.lin, deep=True):
                atoms[a.sk] = a
        sol = solve_rows(self.rows_of(lits), order_hint=sorted(atoms))
        if sol is None:
            return None
        # lazy disequalities
        for l in lits:
            if l.op == "!=":
                v = l.lin.const + sum(c * sol.get(a.sk, 0) for a, c in l.lin.terms)
                if v == 0:
                    split = T.or_(T.cmp("<=", l.lin, T.const(-1)), T.cmp(">=", l.lin, T.ONE))
                    rest = [x for x in lits if x is not l]
                    return self.solve(rest + [split], subs)
        model = self.build_model(sol, atoms)
        # lazy functional consistency of applications
        apps = [a for a in atoms.values() if isinstance(a, App)]
        by_key: dict[tuple, App] = {}
        for a in apps:
            key = (a.fn, tuple(model.lin(x) for x in a.args))
            other = by_key.get(key)
            if other is None:
                by_key[key] = a
                continue
            if sol.get(a.sk, 0) != sol.get(other.sk, 0):
                differ = [T.cmp("!=", x, y) for x, y in zip(a.args, other.args)]
                clause = T.or_(*differ, T.eq(T.atom(a), T.atom(other)))
                return self.solve(list(lits) + [clause], subs)
        for v, expr in reversed(subs):
            model.values[v.name] = model.lin(expr)
        return model

    def build_model(self, sol: dict[str, int], atoms: dict[str, T.Atom]) -> Model:
        model = Model()
        for key, a in atoms.items():
            if isinstance(a, Var):
                model.values[a.name] = sol.get(key, a.lo if a.lo is not None else 0)
        pending = [a for a in atoms.values() if isinstance(a, App)]
        # inner applications first so outer keys evaluate correctly
        pending.sort(key=lambda a: len(a.sk))
        for a in pending:
            model.tables[(a.fn, tuple(model.lin(x) for x in a.args))] = sol.get(a.sk, a.lo or 0)
        return model


def check_sat(formulas: list[Formula], timeout: float = 10.0, max_nodes: int = 200_000) -> SatResult:
    search = _Search(timeout, max_nodes)
    try:
        model = search.solve(list(formulas), [])
    except Unknown as u:
        return SatResult("unknown", reason=u.reason)
    except RecursionError:
        return SatResult("unknown", reason="timeout")
    if model is None:
        return SatResult("unsat")
    if all(model.formula(f) for f in formulas):
        return SatResult("sat", model)
    return SatResult("unknown", reason="out-of-fragment" if search.approx else "incomplete-model")
