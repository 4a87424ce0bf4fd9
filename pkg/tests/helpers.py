"""Shared plumbing for the test suite."""

from __future__ import annotations

import itertools
from pathlib import Path
from types import SimpleNamespace

from art.annotate import elaborate
from art.cgen import cgenProgram
from art.frontend import parseProgram, parseQualifiers
from art.hornsolve import canonSolution, solve
from art.smtback import Backend
from art.wellformed import wfProgram

HERE = Path(__file__).parent
CORPUS = HERE / "corpus"
GOLDENS = HERE / "goldens"


def srcOf(name: str) -> str:
    return (CORPUS / f"{name}.imp").read_text()


def load(name: str):
    prog = parseProgram(srcOf(name))
    wfProgram(prog)
    return prog


def elab(name: str):
    return elaborate(load(name))


def qualsOf(*names):
    out = []
    for n in names:
        out.extend(parseQualifiers((CORPUS / f"{n}.quals").read_text()))
    return out


def pipeline(name: str, quals=("base",), backend=None, **cgenKw):
    """Full run over a corpus file; closes its backend unless one is
    passed in."""
    prog = load(name)
    annotated = elaborate(prog)
    cs, schemas = cgenProgram(annotated, **cgenKw)
    measures = {m.name: m for m in prog.measures}
    b = backend or Backend()
    try:
        res = solve(cs, qualsOf(*quals), b, measures)
        canon = canonSolution(res.solution, b, measures) if res.ok else None
    finally:
        if backend is None:
            b.close()
    return SimpleNamespace(prog=prog, annotated=annotated, cs=cs,
                           schemas=schemas, measures=measures, res=res,
                           canon=canon)


VERIFYING = (("abs", ("base",)), ("absfam", ("base",)),
             ("insert", ("len",)), ("insertsort", ("len",)),
             ("client", ("base",)), ("ifex", ("base",)),
             ("absl_nat", ("base",)))

REJECTED = (("neg_nullhead", ("base",)), ("neg_nullret", ("base",)))


class BoxBackend:
    """Exhaustive validity oracle for order/equality atoms over a small
    integer box.  For predicates built from variable/constant comparisons
    without arithmetic, validity over the box equals validity over the
    integers once the box has more points than there are names."""

    def __init__(self, lo=-3, hi=3):
        self.lo, self.hi = lo, hi
        self.nqueries = 0

    def _eval(self, e, env):
        from art.core import EBin, EBool, EInt, ENot, EVar
        if isinstance(e, EInt):
            return e.n
        if isinstance(e, EBool):
            return e.b
        if isinstance(e, EVar):
            return env[e.name]
        if isinstance(e, ENot):
            return not self._eval(e.arg, env)
        if isinstance(e, EBin):
            l, r = self._eval(e.lhs, env), self._eval(e.rhs, env)
            return {"==": l == r, "!=": l != r, "<=": l <= r, "<": l < r,
                    ">=": l >= r, ">": l > r, "&&": l and r,
                    "||": l or r, "+": l + r, "-": l - r}[e.op]
        raise ValueError(f"box oracle cannot evaluate {e!r}")

    def checkImpl(self, hyps, lhs, rhs, boolVars=frozenset(),
                  measures=None) -> str:
        from art.core import freeVars
        self.nqueries += 1
        preds = list(hyps) + [lhs]
        names = sorted(set().union(*[freeVars(p) for p in preds + [rhs]])
                       or set())
        for vals in itertools.product(range(self.lo, self.hi + 1),
                                      repeat=len(names)):
            env = dict(zip(names, vals))
            if all(self._eval(p, env) for p in preds) and \
                    not self._eval(rhs, env):
                return "invalid"
        return "valid"

    def close(self):
        pass
