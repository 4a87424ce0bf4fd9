"""Predicate-abstraction fixpoint solving for Horn clauses.

Each kappa starts at the conjunction of every qualifier instance whose
sorts fit its scope; iterated weakening removes instances until all
kappa-headed clauses are valid.  Clauses with concrete heads are checked
once the fixpoint is reached; the first invalid one is reported.  An
unknown answer from the backend counts as invalid, which only ever makes
the result weaker.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dfield
from typing import Optional

from .core import (EBin, ENot, EVar, EWild, Expr, Heap, HornClause,
                   KappaApp, RefType, Schema, TRUE, conj, conjuncts,
                   expandKappa, substExpr)


class SolveError(Exception):
    """Solver budget or backend breakdown; an internal error."""


@dataclass
class Solution:
    assignment: dict  # kid -> tuple of concrete Expr conjuncts

    def pred(self, kid: str) -> Expr:
        return conj(list(self.assignment.get(kid, ())))


@dataclass
class SolveResult:
    solution: Optional[Solution]
    failed: Optional[HornClause] = None

    @property
    def ok(self) -> bool:
        return self.failed is None


# ---------------------------------------------------------------------------
# Qualifier instantiation
# ---------------------------------------------------------------------------

def _wildcards(e: Expr, out: dict):
    if isinstance(e, EWild):
        out.setdefault(e.name, e.sort)
    elif isinstance(e, EBin):
        _wildcards(e.lhs, out)
        _wildcards(e.rhs, out)
    elif isinstance(e, ENot):
        _wildcards(e.arg, out)
    elif hasattr(e, "arg"):
        _wildcards(e.arg, out)
    elif hasattr(e, "value"):
        _wildcards(e.value, out)


def _fillWild(e: Expr, asn: dict) -> Expr:
    if isinstance(e, EWild):
        return EVar(asn[e.name])
    if isinstance(e, EBin):
        return EBin(e.op, _fillWild(e.lhs, asn), _fillWild(e.rhs, asn))
    if isinstance(e, ENot):
        return ENot(_fillWild(e.arg, asn))
    from .core import EField, EMeasure
    if isinstance(e, EField):
        return EField(_fillWild(e.value, asn), e.fname)
    if isinstance(e, EMeasure):
        return EMeasure(e.mname, _fillWild(e.arg, asn))
    return e


def instantiateQuals(cs, quals) -> dict:
    """Candidate conjuncts per kappa: every qualifier whose value sort
    matches, with wildcards drawn from same-sorted scope names (and the
    value variable itself)."""
    out = {}
    for kid, vsort in cs.kappaSorts.items():
        scope = cs.kappaScopes[kid]
        cands = []
        for q in quals:
            if q.vsort != vsort:
                continue
            wilds = {}
            _wildcards(q.body, wilds)
            wnames = sorted(wilds)
            pools = []
            for w in wnames:
                pool = [n for n, s, _ in scope if s == wilds[w]]
                if wilds[w] == vsort:
                    pool = pool + ["v"]
                pools.append(pool)
            for combo in itertools.product(*pools):
                inst = _fillWild(q.body, dict(zip(wnames, combo)))
                if inst not in cands:
                    cands.append(inst)
        out[kid] = cands
    return out


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------

def _expand(sol: dict, e: Expr) -> Expr:
    if isinstance(e, KappaApp):
        return conj([expandKappa(e, q) for q in sol.get(e.kid, ())])
    if isinstance(e, EBin) and e.op in ("&&", "||"):
        return EBin(e.op, _expand(sol, e.lhs), _expand(sol, e.rhs))
    return e


def solve(cs, quals, backend, measures: dict = None,
          boolVars: frozenset = frozenset(), slack: int = 2000) -> SolveResult:
    measures = measures or {}
    sol = {kid: list(c) for kid, c in instantiateQuals(cs, quals).items()}
    nInst = sum(len(c) for c in sol.values())
    budget = max(1, len(sol)) * max(1, nInst) + slack
    checks = 0
    kClauses = [c for c in cs.clauses if isinstance(c.head, KappaApp)]
    changed = True
    while changed:
        changed = False
        for c in kClauses:
            kid = c.head.kid
            if not sol.get(kid):
                continue
            hyps = [_expand(sol, p) for p in c.env]
            body = _expand(sol, c.body)
            keep = []
            for q in sol[kid]:
                checks += 1
                if checks > budget:
                    raise SolveError("solver budget exceeded")
                r = backend.checkImpl(hyps, body, expandKappa(c.head, q),
                                      boolVars, measures)
                if r == "valid":
                    keep.append(q)
                else:
                    changed = True
            sol[kid] = keep
    solution = Solution({kid: tuple(v) for kid, v in sol.items()})
    for c in cs.clauses:
        if isinstance(c.head, KappaApp):
            continue
        hyps = [_expand(sol, p) for p in c.env]
        body = _expand(sol, c.body)
        r = backend.checkImpl(hyps, body, c.head, boolVars, measures)
        if r != "valid":
            return SolveResult(solution, failed=c)
    return SolveResult(solution)


# ---------------------------------------------------------------------------
# Applying and reporting a solution
# ---------------------------------------------------------------------------

def _applyRef(sol: Solution, e: Expr) -> Expr:
    if isinstance(e, KappaApp):
        return conj([expandKappa(e, q)
                     for q in sol.assignment.get(e.kid, ())])
    if isinstance(e, EBin) and e.op in ("&&", "||"):
        return EBin(e.op, _applyRef(sol, e.lhs), _applyRef(sol, e.rhs))
    return e


def applySolutionType(sol: Solution, t: RefType) -> RefType:
    from .core import BApp, BRecord
    b = t.base
    if isinstance(b, BRecord):
        b = BRecord(tuple((f, applySolutionType(sol, ft))
                          for f, ft in b.fields))
    elif isinstance(b, BApp):
        b = BApp(b.con, tuple(applySolutionType(sol, a) for a in b.args))
    return RefType(b, _applyRef(sol, t.refinement))


def applySolution(sol: Solution, sch: Schema) -> Schema:
    outH = Heap(tuple((l, b, applySolutionType(sol, ty))
                      for l, b, ty in sch.outHeap.bindings))
    return Schema(sch.locs, sch.tyvars, sch.args, sch.inHeap, sch.outLocs,
                  applySolutionType(sol, sch.ret), outH)


def canonSolution(sol: Solution, backend, measures: dict = None) -> Solution:
    """Drop conjuncts that are tautologies or implied by the rest; the
    reported signature keeps only informative facts."""
    measures = measures or {}
    out = {}
    for kid, qs in sol.assignment.items():
        kept = [q for q in qs
                if backend.checkImpl([], TRUE, q, frozenset(),
                                     measures) != "valid"]
        i = 0
        while i < len(kept):
            rest = kept[:i] + kept[i + 1:]
            if rest and backend.checkImpl(rest, TRUE, kept[i], frozenset(),
                                          measures) == "valid":
                kept.pop(i)
            else:
                i += 1
        out[kid] = tuple(kept)
    return Solution(out)
