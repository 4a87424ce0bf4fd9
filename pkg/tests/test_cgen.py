"""Constraint generation: golden clause sets, semantic oracles, the
fold reachability guard."""

import pytest

from art.cgen import canonClause, cgenProgram, printClause
from art.core import (EBin, EField, EInt, EMeasure, ENot, ENull, EVar,
                      KappaApp, NU, eq)
from art.hornsolve import _expand
from helpers import GOLDENS, elab, pipeline


def clauseLines(name, **kw):
    cs, _ = cgenProgram(elab(name), **kw)
    return [canonClause(c) for c in cs.clauses]


def checkAll(cs, sol, backend, measures):
    """Validity of every clause under a candidate assignment (a plain
    kid -> conjunct-tuple dict); returns the first failing clause."""
    for c in cs.clauses:
        hyps = [_expand(sol, p) for p in c.env]
        res = backend.checkImpl(hyps, _expand(sol, c.body),
                                _expand(sol, c.head), measures=measures)
        if res != "valid":
            return c
    return None


@pytest.mark.parametrize("name", ["absfam", "insert"])
def testGoldenClauses(name):
    want = (GOLDENS / f"{name}.clauses").read_text().splitlines()
    assert clauseLines(name) == want


def testAbsClauseShape():
    cs, _ = cgenProgram(elab("abs"))
    heads = [c.head for c in cs.clauses]
    assert all(isinstance(h, KappaApp) for h in heads)
    kids = {h.kid for h in heads}
    assert len(kids) == 1
    # both branches flow into the single output template
    assert len(cs.clauses) == 2


def lenK(rhs):
    return eq(EMeasure("len", NU), rhs)


def testInsertSolutionSemantics(backend):
    r = pipeline("insert", ("len",), backend=backend)
    (kid,) = [k for k, s in r.cs.kappaSorts.items() if s == "list"]
    good = {kid: (lenK(EBin("+", EInt(1),
                             EMeasure("len", EVar("x0")))),)}
    assert checkAll(r.cs, good, backend, r.measures) is None
    bad = {kid: (lenK(EMeasure("len", EVar("x0"))),)}
    failing = checkAll(r.cs, bad, backend, r.measures)
    # a producer clause refutes the unchanged-length guess: the new cell
    # makes the output one longer than the snapshot
    assert failing is not None
    assert isinstance(failing.head, KappaApp)


def testInsertNullBranchDerivesBaseCase():
    lines = clauseLines("insert")
    base = [l for l in lines if "1 + len(null)" in l]
    assert len(base) == 1 and base[0].endswith("=> k1")


def testInsertRecursiveCallInstantiates():
    cs, _ = cgenProgram(elab("insert"))
    withApp = [c for c in cs.clauses
               if any(isinstance(p, KappaApp) for p in c.env)]
    # the recursive call's output refinement enters later clauses as a
    # pending-substitution application
    assert withApp
    for c in withApp:
        app = next(p for p in c.env if isinstance(p, KappaApp))
        assert dict(app.pending).keys() >= {"v"}


def testConcClauseShape():
    cs, _ = cgenProgram(elab("insert"))
    concs = [c for c in cs.clauses if c.provenance.startswith("conc")]
    assert concs
    for c in concs:
        assert c.head == ENot(eq(NU, ENull()))


def testFoldGuardClauseEmittedAndValid(backend):
    r = pipeline("absl_nat", ("base",), backend=backend)
    guarded = [c for c in r.cs.clauses
               if any(isinstance(p, ENot) and isinstance(p.arg, EBin)
                      and isinstance(p.arg.lhs, EField)
                      and p.arg.lhs.fname == "next"
                      and p.arg.rhs == ENull() for p in c.env)]
    assert guarded
    # the null-test guard contradicts the tail-was-null hypothesis, so the
    # clause holds vacuously
    target = [c for c in guarded
              if any(isinstance(p, EBin) and p.op == "=="
                     and p.rhs == ENull() and isinstance(p.lhs, EVar)
                     for p in c.env)]
    assert target
    sol = r.res.solution.assignment
    for c in target:
        hyps = [_expand(sol, p) for p in c.env]
        assert backend.checkImpl(hyps, _expand(sol, c.body),
                                 _expand(sol, c.head),
                                 measures=r.measures) == "valid"


def testFoldGuardRemovalBreaksVerification(backend):
    assert pipeline("absl_nat", ("base",)).res.ok
    r = pipeline("absl_nat", ("base",), foldNullGuard=False)
    assert not r.res.ok


def testGuardIsOnlyDifference():
    on = clauseLines("absl_nat")
    off = clauseLines("absl_nat", foldNullGuard=False)
    assert len(on) == len(off)
    diffs = [(a, b) for a, b in zip(on, off) if a != b]
    assert diffs
    for a, b in diffs:
        assert "next == null" in a and "next == null" not in b


def testCanonClauseStable():
    cs, _ = cgenProgram(elab("insert"))
    for c in cs.clauses:
        assert canonClause(c) == canonClause(c)
        assert "|-" in printClause(c) and "=>" in printClause(c)
