"""Fixpoint solver: candidate instantiation, brute-force equivalence,
solution application and canonicalization."""

import random

import pytest

from art.cgen import ConstraintSet, cgenProgram, printPred
from art.core import (EBin, EInt, EVar, KappaApp, NU, NameGen, eq,
                      expandKappa)
from art.frontend import parseQualifiers, printSchema
from art.hornsolve import (Solution, _expand, applySolution, canonSolution,
                           instantiateQuals, solve)
from helpers import BoxBackend, VERIFYING, elab, pipeline, qualsOf


def testInsertCandidateSet():
    cs, _ = cgenProgram(elab("insert"))
    (cands,) = instantiateQuals(cs, qualsOf("len")).values()
    assert sorted(printPred(c) for c in cands) == [
        "len(v) == 1 + len(v)", "len(v) == 1 + len(x0)",
        "len(v) == len(v)", "len(v) == len(x0)"]


def testWildcardPoolRespectsSort():
    cs, _ = cgenProgram(elab("insert"))
    for cands in instantiateQuals(cs, qualsOf("base")).values():
        # int qualifiers never mention pointer or snapshot names
        for c in cands:
            assert "x0" not in printPred(c)


# ---------------------------------------------------------------------------
# Solver vs brute force on random constraint sets
# ---------------------------------------------------------------------------

class CachedBox(BoxBackend):
    def __init__(self, *a, **kw):
        super().__init__(*a, **kw)
        self._memo = {}

    def checkImpl(self, hyps, lhs, rhs, boolVars=frozenset(), measures=None):
        key = (tuple(hyps), lhs, rhs)
        if key not in self._memo:
            self._memo[key] = super().checkImpl(hyps, lhs, rhs)
        return self._memo[key]


QUALS = parseQualifiers("""
qualif Nonneg(v:int): 0 <= v
qualif Nonpos(v:int): v <= 0
qualif UpTo(v:int): v <= ~A:int
qualif EqTo(v:int): v == ~A:int
""")

VARS = ("a", "b")
FACTS = (EBin("<=", EInt(0), EVar("a")), EBin("<=", EVar("a"), EVar("b")),
         EBin("<=", EVar("b"), EInt(0)), eq(EVar("a"), EVar("b")),
         eq(EVar("a"), EInt(1)))
HEADS = (EBin("<=", EInt(0), NU), EBin("<=", NU, EVar("b")))


def randomCase(rng):
    cs = ConstraintSet()
    gen = NameGen(set())
    scope = tuple((n, "int", "var") for n in VARS)
    kids = [cs.newKappa(gen, "int", scope)
            for _ in range(rng.randint(1, 3))]
    quals = rng.sample(QUALS, rng.randint(1, 2))
    for _ in range(rng.randint(1, 4)):
        env = rng.sample(FACTS, rng.randint(0, 2))
        if len(kids) > 1 and rng.random() < 0.5:
            env = env + [KappaApp(rng.choice(kids),
                                  (("v", EVar(rng.choice(VARS))),))]
        body = eq(NU, rng.choice([EVar(rng.choice(VARS)), EInt(0), EInt(1)]))
        if rng.random() < 0.25:
            head = rng.choice(HEADS)
        else:
            head = KappaApp(rng.choice(kids), ())
        cs.add(env, body, head, "rand")
    return cs, quals


def allKappaValid(cs, asn, box):
    for c in cs.clauses:
        if not isinstance(c.head, KappaApp):
            continue
        hyps = [_expand(asn, p) for p in c.env]
        for q in asn[c.head.kid]:
            if box.checkImpl(hyps, _expand(asn, c.body),
                             expandKappa(c.head, q)) != "valid":
                return False
    return True


def bruteForce(cs, cands, box):
    """Greatest candidate assignment making all kappa clauses valid (valid
    assignments are union-closed), then the first failing concrete head."""
    items = [(kid, q) for kid in cands for q in cands[kid]]
    best = {kid: set() for kid in cands}
    for mask in range(2 ** len(items)):
        asn = {kid: tuple(q for j, (k2, q) in enumerate(items)
                          if k2 == kid and mask >> j & 1) for kid in cands}
        if allKappaValid(cs, asn, box):
            for kid in cands:
                best[kid] |= set(asn[kid])
    asn = {kid: tuple(q for q in cands[kid] if q in best[kid])
           for kid in cands}
    failed = None
    for c in cs.clauses:
        if isinstance(c.head, KappaApp):
            continue
        hyps = [_expand(asn, p) for p in c.env]
        if box.checkImpl(hyps, _expand(asn, c.body), c.head) != "valid":
            failed = c
            break
    return asn, failed


def testSolverMatchesBruteForce():
    rng = random.Random(20240824)
    box = CachedBox()
    for case in range(500):
        cs, quals = randomCase(rng)
        cands = instantiateQuals(cs, quals)
        if sum(len(v) for v in cands.values()) > 6:
            continue
        res = solve(cs, quals, box)
        want, wantFailed = bruteForce(cs, cands, box)
        got = {kid: set(v) for kid, v in res.solution.assignment.items()}
        assert got == {kid: set(v) for kid, v in want.items()}, f"case {case}"
        assert (res.failed is None) == (wantFailed is None), f"case {case}"


# ---------------------------------------------------------------------------
# Round-trip soundness on the corpus
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name,quals", VERIFYING)
def testRoundTripSoundness(name, quals, backend):
    r = pipeline(name, quals, backend=backend)
    assert r.res.ok
    sol = r.res.solution.assignment
    for c in r.cs.clauses:
        hyps = [_expand(sol, p) for p in c.env]
        head = _expand(sol, c.head) if isinstance(c.head, KappaApp) \
            else c.head
        assert backend.checkImpl(hyps, _expand(sol, c.body), head,
                                 measures=r.measures) == "valid", \
            f"{name}: {c.provenance}"


# ---------------------------------------------------------------------------
# Reporting
# ---------------------------------------------------------------------------

def testApplySolutionInsert(backend):
    r = pipeline("insert", ("len",), backend=backend)
    sch = applySolution(r.canon, r.schemas["insert"])
    text = printSchema(sch)
    assert "len(v) == 1 + len(x0)" in text
    assert "k1" not in text


def testCanonSolutionDropsNoise(backend):
    x = EVar("x0")
    sol = Solution({"k1": (EBin("<=", NU, NU), eq(NU, x),
                           EBin("<=", x, NU))})
    out = canonSolution(sol, backend)
    assert out.assignment["k1"] == (eq(NU, x),)
