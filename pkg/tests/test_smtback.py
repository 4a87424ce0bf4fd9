"""Backend wrapper: encoding, measure axioms, caching, query emission."""

import os

import pytest

from art.core import (EBin, EField, EInt, EMeasure, ENot, ENull, EVar, eq)
from art.frontend import parseProgram
from art.smtback import (Backend, buildQuery, encodePred, fieldConst,
                         measureNullValue)
from helpers import srcOf

X, Y = EVar("x"), EVar("y")


def lenOf(e):
    return EMeasure("len", e)


@pytest.fixture(scope="module")
def measures():
    prog = parseProgram(srcOf("insert"))
    return {m.name: m for m in prog.measures}


def testEncodePred():
    p = EBin("&&", eq(X, EInt(1)), ENot(EBin("<=", X, Y)))
    assert encodePred(p) == "(and (= x 1) (not (<= x y)))"
    assert encodePred(eq(EField(X, "data"), EInt(0))) == \
        f"(= (Field x {fieldConst('data')}) 0)"


def testMeasureNullValue(measures):
    assert measureNullValue(measures["len"]) == 0


def testBuildQueryDeclares(measures):
    body = buildQuery([eq(lenOf(X), EInt(2)), ENot(eq(X, ENull()))],
                      set(), measures)
    assert "(declare-fun len (Int) Int)" in body
    assert "(= (len null) 0)" in body
    assert "(declare-const x Int)" in body


def testValidityBasics(backend):
    assert backend.checkImpl([], eq(X, EInt(1)),
                             EBin("<=", EInt(0), X)) == "valid"
    assert backend.checkImpl([], eq(X, EInt(-1)),
                             EBin("<=", EInt(0), X)) == "invalid"


def testMeasureNullAxiom(backend, measures):
    res = backend.checkImpl([eq(X, ENull())], eq(lenOf(Y), lenOf(X)),
                            eq(lenOf(Y), EInt(0)), measures=measures)
    assert res == "valid"


def testFieldCongruence(backend):
    res = backend.checkImpl([eq(X, Y)],
                            eq(EVar("d"), EField(X, "data")),
                            eq(EVar("d"), EField(Y, "data")))
    assert res == "valid"


def testFieldConstsDistinct(backend):
    # distinct field selectors must not be conflated
    res = backend.checkImpl([eq(EField(X, "data"), EInt(0))],
                            eq(X, X),
                            eq(EField(X, "next"), EInt(0)))
    assert res == "invalid"


def testCacheHitsSkipProcess(measures):
    b = Backend()
    try:
        q = (([], eq(X, EInt(1)), EBin("<=", EInt(0), X)))
        b.checkImpl(*q)
        n = b.nqueries
        b.checkImpl(*q)
        assert b.nqueries == n
    finally:
        b.close()


def testEmitDir(tmp_path):
    b = Backend(emitDir=str(tmp_path), cache=False)
    try:
        b.checkImpl([], eq(X, EInt(1)), eq(X, EInt(1)))
    finally:
        b.close()
    files = sorted(os.listdir(tmp_path))
    assert files and files[0].endswith(".smt2")
    text = (tmp_path / files[0]).read_text()
    assert text.startswith("(set-logic") and "(check-sat)" in text


def testBrokenSolverRaises():
    from art.smtback import BackendError
    b = Backend(cmd=["false"], timeout=0.5, cache=False)
    try:
        with pytest.raises(BackendError):
            b.checkImpl([], eq(X, EInt(1)), eq(X, EInt(2)))
    finally:
        b.close()


def testEnvOverride(monkeypatch):
    import sys
    from art.smtback import defaultSolverCmd
    monkeypatch.setenv("ART_SMT", "z3 -in")
    assert defaultSolverCmd() == ["z3", "-in"]
    monkeypatch.delenv("ART_SMT")
    assert defaultSolverCmd() == [sys.executable, "-m", "art.minismt"]
