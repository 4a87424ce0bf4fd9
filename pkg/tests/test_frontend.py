"""Parser and printer: round trips, hoisting, qualifiers, errors."""

import pytest

from art.core import EWild, SAssign, SCall, SRead
from art.frontend import (ParseError, parseProgram, parseQualifiers,
                          printExpr, printProgram)
from helpers import CORPUS, srcOf

ALL = sorted(p.stem for p in CORPUS.glob("*.imp"))


@pytest.mark.parametrize("name", ALL)
def testRoundTripIsFixpoint(name):
    p1 = parseProgram(srcOf(name))
    text = printProgram(p1)
    p2 = parseProgram(text)
    assert p1 == p2
    assert printProgram(p2) == text


def testHoistingNestedRead():
    src = srcOf("insert").replace(
        "var d = x.data;\n    if (k <= d)", "if (k <= x.data)")
    p = parseProgram(src)
    body = p.function("insert").body
    inner = body[0].els[0]
    # the field read is hoisted to a temporary before the branch
    assert isinstance(inner, SRead)
    assert inner.y.startswith("tmp")


def testHoistingCallInExpr():
    src = """(x: int) / emp => int / emp
function f(x) {
  return x;
}

(x: int) / emp => int / emp
function g(x) {
  var y = f(x) + 1;
  return y;
}
"""
    p = parseProgram(src)
    body = p.function("g").body
    assert isinstance(body[0], SCall)
    assert isinstance(body[1], SAssign)


def testAssertDesugarsToCall():
    src = """(x: int) / emp => int / emp
function f(x) {
  assert(0 <= x);
  return x;
}
"""
    p = parseProgram(src)
    s = p.function("f").body[0]
    assert isinstance(s, SCall) and s.fname == "assert" and s.x is None


def testQualifierParsing():
    qs = parseQualifiers("qualif LenSucc(v:list): len(v) == 1 + len(~A:list)")
    assert len(qs) == 1
    q = qs[0]
    assert q.vsort == "list"
    assert any(isinstance(x, EWild) and x.sort == "list"
               for x in _subterms(q.body))


def _subterms(e):
    yield e
    for attr in ("lhs", "rhs", "arg", "value"):
        sub = getattr(e, attr, None)
        if sub is not None:
            yield from _subterms(sub)


def testPrintExprPrecedence():
    from art.core import EBin, EInt, EVar
    e = EBin("-", EInt(0), EBin("+", EVar("a"), EVar("b")))
    assert printExpr(e) == "0 - (a + b)"
    e2 = EBin("+", EBin("-", EInt(0), EVar("a")), EVar("b"))
    assert printExpr(e2) == "0 - a + b"


@pytest.mark.parametrize("bad", [
    "function f() { return 0; }",           # missing schema
    "(x: int) / emp => int / emp\nfunction f(x) { return 0 }",  # missing ;
    "(x: ref(&x)) / emp => int / emp\nfunction f(x) { return 0; }"
    .replace("ref(&x", "ref(x"),            # bad location syntax
    "qualif P(v:int) 0 <= v",               # missing colon
])
def testParseErrors(bad):
    with pytest.raises(ParseError):
        if bad.startswith("qualif"):
            parseQualifiers(bad)
        else:
            parseProgram(bad)


def testAnnotationsRoundTrip():
    src = srcOf("insert")
    from art.annotate import elaborate
    p = elaborate(parseProgram(src))
    text = printProgram(p)
    assert "//: conc(x)" in text and "//: fold(&y1)" in text
    assert parseProgram(text) == p
