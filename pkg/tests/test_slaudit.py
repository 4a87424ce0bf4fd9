"""Separation-logic audit: denotations, snapshots, measure agreement."""

import random

import pytest

from art.slaudit import (AExists, AOr, APointsTo, AuditError, auditProgram,
                         auditPure, denote, evalMeasure, models,
                         printAssertion, tailField, typePredicate, walk,
                         wfSnapshot)
from helpers import load


@pytest.fixture(scope="module")
def prog():
    return load("insert")


def cell(data, nxt):
    return {"data": data, "next": nxt}


PINNED = cell(1, cell(2, None))


def randomSnap(rng, depth):
    if depth <= 0 or rng.random() < 0.25:
        return None
    return cell(rng.randint(-5, 5), randomSnap(rng, depth - 1))


def testTailField(prog):
    assert tailField(prog.typedef("list")) == "next"


def testPinnedLen(prog):
    # len unrolls to 1 + (1 + 0) = 2 on the two-cell list
    assert evalMeasure(prog, "len", PINNED) == 2
    assert evalMeasure(prog, "len", None) == 0


def testEvalMeasureMatchesWalk(prog):
    rng = random.Random(7)
    for _ in range(200):
        s = randomSnap(rng, 5)
        wfSnapshot(prog, "list", s)
        assert evalMeasure(prog, "len", s) == len(walk(prog, "list", s))


def testAuditPureAgreement(prog):
    rng = random.Random(8)
    for _ in range(50):
        s = randomSnap(rng, 4)
        for line in auditPure(prog, "list", s):
            assert "disagree" not in line


def testModelsDepth(prog):
    assert models(prog, "list", None, 0)
    assert models(prog, "list", PINNED, 2)
    assert not models(prog, "list", PINNED, 1)


def testDenoteShape(prog):
    a = denote(prog, "list", "x", 1)
    assert isinstance(a, AOr)
    nullCase, consCase = a.parts
    assert printAssertion(nullCase) == "x == null"
    assert isinstance(consCase, AExists)
    star = consCase.body
    assert any(isinstance(p, APointsTo) for p in star.parts)


def testPrintAssertionReadable(prog):
    text = printAssertion(typePredicate(prog, "list", depth=2))
    assert text.count("exists") == 2
    assert "|->" in text and "\\/" in text and "*" in text


def testAuditProgramReports(prog):
    lines = auditProgram(prog)
    assert lines
    assert any("len" in line for line in lines)


def testAuditProgramCatchesLies(prog):
    # a deliberately wrong interpreter result must trip the audit
    bad = cell(0, "notasnapshot")
    with pytest.raises(AuditError):
        wfSnapshot(prog, "list", bad)


def testWrongFieldsRejected(prog):
    with pytest.raises(AuditError):
        wfSnapshot(prog, "list", {"data": 1})
