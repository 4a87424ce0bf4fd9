"""Separation-logic reading of folded summaries, used as an audit.

A summary type denotes a predicate with the usual null-guard shape:

    C(x) = (x = null) or (exists t. x |-> {f1: x.f1, ...} * C(t))

denote unrolls that predicate to a finite depth.  Snapshots are concrete
value trees; walk lists the cells a snapshot reaches along its recursive
field, and evalMeasure interprets a measure definition directly over a
snapshot.  The audit cross-checks the two readings: a measure evaluated
by interpretation must agree with the value recovered from the
separation-logic walk, and every snapshot must satisfy the unrolled
predicate at sufficient depth.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .core import (BApp, BInt, BMaybeRef, BRecord, BRef, BTyVar, EBin,
                   EBool, EInt, ENot, ENull, EVar, Expr, Measure, Program,
                   RefType, TypeDef, eq)


class AuditError(Exception):
    pass


# ---------------------------------------------------------------------------
# Assertions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AEmp:
    pass


@dataclass(frozen=True)
class APure:
    pred: Expr


@dataclass(frozen=True)
class APointsTo:
    addr: str
    fields: tuple  # of (name, str term)


@dataclass(frozen=True)
class AStar:
    parts: tuple


@dataclass(frozen=True)
class AOr:
    parts: tuple


@dataclass(frozen=True)
class AExists:
    names: tuple
    body: "Assertion"


Assertion = Union[AEmp, APure, APointsTo, AStar, AOr, AExists]


def printAssertion(a: Assertion) -> str:
    if isinstance(a, AEmp):
        return "emp"
    if isinstance(a, APure):
        from .frontend import printExpr
        return printExpr(a.pred)
    if isinstance(a, APointsTo):
        inner = ", ".join(f"{f}: {t}" for f, t in a.fields)
        return f"{a.addr} |-> {{{inner}}}"
    if isinstance(a, AStar):
        return " * ".join(_paren(p) for p in a.parts)
    if isinstance(a, AOr):
        return " \\/ ".join(_paren(p) for p in a.parts)
    if isinstance(a, AExists):
        return "exists " + ", ".join(a.names) + ". " + printAssertion(a.body)
    raise AuditError(f"unprintable assertion {a!r}")


def _paren(a: Assertion) -> str:
    s = printAssertion(a)
    if isinstance(a, (AOr, AExists)):
        return f"({s})"
    return s


# ---------------------------------------------------------------------------
# Denotation
# ---------------------------------------------------------------------------

def tailField(d: TypeDef) -> str:
    """The recursive pointer field of a definition (lists have one)."""
    tails = [f for f, ft in d.rootRecord.base.fields
             if isinstance(ft.base, (BRef, BMaybeRef))]
    if len(tails) != 1:
        raise AuditError(f"type {d.name} needs exactly one pointer field")
    return tails[0]


def denote(prog: Program, con: str, x: str, depth: int,
           counter: list = None) -> Assertion:
    """The predicate C(x), unrolled depth times; the last unrolling ends
    in the null case only."""
    d = prog.typedef(con)
    counter = counter if counter is not None else [0]
    nullCase = APure(eq(EVar(x), ENull()))
    if depth <= 0:
        return nullCase
    tf = tailField(d)
    counter[0] += 1
    t = f"t{counter[0]}"
    cell = APointsTo(x, tuple((f, f"{x}.{f}")
                              for f, _ in d.rootRecord.base.fields))
    link = APure(eq(EVar(f"{x}.{tf}"), EVar(t)))
    rest = denote(prog, con, t, depth - 1, counter)
    cons = AExists((t,), AStar((cell, link, rest)))
    return AOr((nullCase, cons))


def typePredicate(prog: Program, con: str, depth: int = 3) -> Assertion:
    return denote(prog, con, "x", depth)


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

# A snapshot is None (null) or a dict mapping field names to ints for
# data fields and snapshots for pointer fields.
Snapshot = Optional[dict]


def wfSnapshot(prog: Program, con: str, s: Snapshot):
    if s is None:
        return
    d = prog.typedef(con)
    names = [f for f, _ in d.rootRecord.base.fields]
    if sorted(s) != sorted(names):
        raise AuditError(f"snapshot fields {sorted(s)} do not match "
                         f"{con}")
    for f, ft in d.rootRecord.base.fields:
        if isinstance(ft.base, (BRef, BMaybeRef)):
            wfSnapshot(prog, con, s[f])
        elif not isinstance(s[f], int):
            raise AuditError(f"snapshot field {f} must be an integer")


def walk(prog: Program, con: str, s: Snapshot) -> list:
    """Cells reachable along the recursive field, in order."""
    d = prog.typedef(con)
    tf = tailField(d)
    out = []
    seen = 0
    while s is not None:
        out.append(s)
        s = s[tf]
        seen += 1
        if seen > 10 ** 6:
            raise AuditError("snapshot is cyclic")
    return out


def evalMeasure(prog: Program, mname: str, s: Snapshot) -> int:
    m = _measure(prog, mname)

    def ev(e: Expr, cur: Snapshot):
        if isinstance(e, EInt):
            return e.n
        if isinstance(e, EBool):
            return e.b
        if isinstance(e, ENull):
            return None
        if isinstance(e, EVar):
            if e.name == m.param:
                return cur
            raise AuditError(f"measure {mname}: free variable {e.name}")
        if isinstance(e, EBin):
            l, r = ev(e.lhs, cur), ev(e.rhs, cur)
            if e.op == "==":
                return l == r
            if e.op == "!=":
                return l != r
            if e.op == "+":
                return l + r
            if e.op == "-":
                return l - r
            if e.op == "<=":
                return l <= r
            if e.op == "<":
                return l < r
            if e.op == ">=":
                return l >= r
            if e.op == ">":
                return l > r
            if e.op == "&&":
                return l and r
            if e.op == "||":
                return l or r
            raise AuditError(f"measure {mname}: bad operator {e.op}")
        if isinstance(e, ENot):
            return not ev(e.arg, cur)
        from .core import EField, EIte, EMeasure
        if isinstance(e, EField):
            v = ev(e.value, cur)
            if v is None:
                raise AuditError(f"measure {mname}: field of null")
            return v[e.fname]
        if isinstance(e, EMeasure):
            return evalMeasure(prog, e.mname, ev(e.arg, cur))
        if isinstance(e, EIte):
            return ev(e.then, cur) if ev(e.cond, cur) else ev(e.els, cur)
        raise AuditError(f"measure {mname}: bad term {e!r}")

    return ev(m.body, s)


def _measure(prog: Program, mname: str) -> Measure:
    for m in prog.measures:
        if m.name == mname:
            return m
    raise AuditError(f"unknown measure {mname}")


# ---------------------------------------------------------------------------
# The audit
# ---------------------------------------------------------------------------

def models(prog: Program, con: str, s: Snapshot, depth: int) -> bool:
    """Does the snapshot satisfy the predicate unrolled depth times?"""
    if s is None:
        return True
    if depth <= 0:
        return False
    d = prog.typedef(con)
    return models(prog, con, s[tailField(d)], depth - 1)


def auditPure(prog: Program, con: str, s: Snapshot) -> list:
    """Pure facts the separation-logic reading yields for a snapshot:
    every measure value recovered by structural recursion along the
    walk.  Returned as (measure name, value) pairs."""
    wfSnapshot(prog, con, s)
    d = prog.typedef(con)
    tf = tailField(d)
    out = []
    for m in d.measures:
        cells = walk(prog, con, s)
        val = evalMeasure(prog, m.name, None)
        for cell in reversed(cells):
            sub = dict(cell)
            # recompute one unfolding at a time, from the tail inward
            val = evalMeasure(prog, m.name,
                              _graft(prog, con, sub, tf, val, m.name))
        out.append((m.name, val))
    return out


def _graft(prog: Program, con: str, cell: dict, tf: str, tailVal, mname):
    """Replace the cell's tail by any snapshot whose measure equals
    tailVal; structural recursion only ever looks at the measure of the
    tail, so a canonical representative suffices."""
    rep = None
    guard = 0
    while evalMeasure(prog, mname, rep) != tailVal:
        d = prog.typedef(con)
        fields = {}
        for f, ft in d.rootRecord.base.fields:
            fields[f] = rep if isinstance(ft.base, (BRef, BMaybeRef)) else 0
        rep = fields
        guard += 1
        if guard > 10 ** 4:
            raise AuditError(f"cannot reconstruct a {con} snapshot with "
                             f"{mname} = {tailVal}")
    out = dict(cell)
    out[tf] = rep
    return out


def auditProgram(prog: Program, samples: list = None, depth: int = 6) -> list:
    """Audit report lines.  For each definition: the unrolled predicate,
    and agreement of the two measure readings on the samples."""
    lines = []
    for d in prog.typedefs:
        lines.append(f"type {d.name}:")
        lines.append("  " + printAssertion(typePredicate(prog, d.name, 3)))
        for s in (samples if samples is not None else
                  _defaultSamples(prog, d)):
            if not models(prog, d.name, s, depth):
                raise AuditError(f"snapshot exceeds depth {depth}")
            for mname, val in auditPure(prog, d.name, s):
                direct = evalMeasure(prog, mname, s)
                if direct != val:
                    raise AuditError(
                        f"measure {mname}: interpreter says {direct}, "
                        f"separation-logic walk says {val}")
        for m in d.measures:
            lines.append(f"  measure {m.name}: ok")
    return lines


def _defaultSamples(prog: Program, d: TypeDef) -> list:
    tf = tailField(d)
    out = [None]
    cur = None
    for i in range(4):
        cell = {}
        for f, ft in d.rootRecord.base.fields:
            cell[f] = cur if isinstance(ft.base, (BRef, BMaybeRef)) else i
        cur = cell
        out.append(cur)
    return out
