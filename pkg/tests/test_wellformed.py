"""Well-formedness: sorts, declarations, measure shape, scoping."""

import pytest

from art.frontend import parseProgram
from art.wellformed import WFError, snapTy, wfProgram
from helpers import CORPUS, load

ALL = sorted(p.stem for p in CORPUS.glob("*.imp"))


@pytest.mark.parametrize("name", ALL)
def testCorpusIsWellFormed(name):
    load(name)  # raises on failure


def testSnapSorts():
    p = load("insert")
    from art.core import (BApp, BBool, BInt, BMaybeRef, BRef, BTyVar,
                          RefType)
    assert snapTy(p, BInt()) == "int"
    assert snapTy(p, BBool()) == "bool"
    assert snapTy(p, BRef("&x")) == "ptr"
    assert snapTy(p, BMaybeRef("&x")) == "ptr"
    assert snapTy(p, BTyVar("A")) == "tyvar:A"
    assert snapTy(p, BApp("list", (RefType(BInt()),))) == "list"
    with pytest.raises(WFError):
        snapTy(p, BApp("tree", ()))


def _expectWF(src):
    with pytest.raises(WFError):
        wfProgram(parseProgram(src))


def testReturnedLocNeedsHeapBinding():
    _expectWF("""(x: int) / emp => ref(&l) / &q |-> q0: int
function f(x) {
  return null;
}
""")


def testRefParamNeedsHeapBinding():
    _expectWF("""(x: ref(&x)) / emp => int / emp
function f(x) {
  return 0;
}
""")


def testMeasureMustCaseOnNull():
    _expectWF("""type list[A] = exists! l => t: list[A] . h: {data: A, next: ?ref(l)}
measure len(x: list[A]) = 1 + len(x.next)

(x: int) / emp => int / emp
function f(x) {
  return x;
}
""")


def testMeasureRecursionOnPointerFieldOnly():
    _expectWF("""type list[A] = exists! l => t: list[A] . h: {data: A, next: ?ref(l)}
measure len(x: list[A]) = if (x == null) then 0 else 1 + len(x.data)

(x: int) / emp => int / emp
function f(x) {
  return x;
}
""")


def testUnboundVariableRejected():
    _expectWF("""(x: int) / emp => int / emp
function f(x) {
  return y;
}
""")


def testDoubleDefinitionRejected():
    _expectWF("""(x: int) / emp => int / emp
function f(x) {
  var y = 1;
  var y = 2;
  return y;
}
""")


def testUnknownCalleeRejected():
    _expectWF("""(x: int) / emp => int / emp
function f(x) {
  var y = g(x);
  return y;
}
""")
