"""Core model: expressions, types, substitution, fresh names."""

from hypothesis import given, strategies as st

from art.core import (BInt, BRef, EBin, EInt, EVar, Heap, KappaApp, NU,
                      NameGen, RefType, TRUE, conj, conjuncts, eq,
                      expandKappa, freeVars, substExpr)


def testFreshNames():
    g = NameGen({"x", "x1"})
    assert g.fresh("x") == "x2"
    assert g.fresh("y") == "y"
    assert g.fresh("y") == "y1"
    assert g.fresh("t", kind="location") == "&t"
    assert g.fresh("t", kind="location") == "&t1"


def testFreshStripsDigits():
    g = NameGen({"x0"})
    assert g.fresh("x0") == "x1"


def testSubstComposesPending():
    app = KappaApp("k1", (("x", EVar("y")),))
    out = substExpr({"v": EVar("t")}, app)
    assert out == KappaApp("k1", (("x", EVar("y")), ("v", EVar("t"))))


def testExpandKappaOrder():
    # [x := y] then [y := 3]: the first image is rewritten by the second
    app = KappaApp("k1", (("x", EVar("y")), ("y", EInt(3))))
    assert expandKappa(app, eq(NU, EVar("x"))) == eq(NU, EInt(3))


def testHeapStrongUpdate():
    h = Heap().bind("&x", "x0", RefType(BInt()))
    h2 = h.update("&x", "x1", RefType(BInt(), eq(NU, EInt(1))))
    assert h2.lookup("&x")[0] == "x1"
    assert h.lookup("&x")[0] == "x0"  # persistent
    assert list(h2.remove("&x").dom()) == []


def testRefinedConjoins():
    t = RefType(BRef("&l"), eq(NU, EVar("y")))
    t2 = t.refined(eq(NU, EVar("z")))
    assert set(conjuncts(t2.refinement)) == {eq(NU, EVar("y")),
                                             eq(NU, EVar("z"))}


@given(st.lists(st.sampled_from([eq(EVar("a"), EInt(1)),
                                 eq(EVar("b"), EInt(2)),
                                 EBin("<=", EInt(0), EVar("c"))]),
                max_size=5))
def testConjConjunctsRoundTrip(ps):
    # conjuncts flattens exactly the conjunction structure conj builds
    assert list(conjuncts(conj(ps))) == list(ps)


def testConjEmptyIsTrue():
    assert conj([]) == TRUE
    assert list(conjuncts(TRUE)) == []


def testFreeVars():
    e = EBin("&&", eq(EVar("a"), EVar("b")), eq(NU, EInt(1)))
    assert freeVars(e) == {"a", "b", "v"}
