"""The bundled SMT-LIB2 solver, driven over its stdin protocol."""

import subprocess
import sys

PRELUDE = "(set-logic QF_UFLIA)\n"


def runSolver(script: str) -> list:
    out = subprocess.run([sys.executable, "-m", "art.minismt"],
                         input=PRELUDE + script, capture_output=True,
                         text=True, timeout=30)
    assert out.returncode == 0, out.stderr
    return out.stdout.split()


def check(script: str) -> str:
    res = runSolver(script + "(check-sat)\n")
    assert len(res) == 1
    return res[0]


def testLinearArithSat():
    assert check("""(declare-const x Int)
(assert (<= 0 x))
(assert (<= x 5))
""") == "sat"


def testLinearArithUnsat():
    assert check("""(declare-const x Int)
(declare-const y Int)
(assert (< x y))
(assert (< y x))
""") == "unsat"


def testIntegerTightening():
    # 0 < 2x < 2 has a rational solution but no integer one
    assert check("""(declare-const x Int)
(assert (< 0 (* 2 x)))
(assert (< (* 2 x) 2))
""") == "unsat"


def testCongruence():
    assert check("""(declare-const x Int)
(declare-const y Int)
(declare-fun f (Int) Int)
(assert (= x y))
(assert (not (= (f x) (f y))))
""") == "unsat"


def testUninterpretedTwoArgs():
    assert check("""(declare-const a Int)
(declare-const b Int)
(declare-fun g (Int Int) Int)
(assert (not (= (g a b) (g a b))))
""") == "unsat"


def testDistinct():
    assert check("""(declare-const a Int)
(declare-const b Int)
(assert (distinct a b))
(assert (= a b))
""") == "unsat"


def testBooleanStructure():
    assert check("""(declare-const p Bool)
(declare-const q Bool)
(assert (or p q))
(assert (not p))
(assert (not q))
""") == "unsat"


def testIte():
    assert check("""(declare-const x Int)
(declare-const y Int)
(assert (= y (ite (< x 0) (- 0 x) x)))
(assert (< y 0))
""") == "unsat"


def testPushPopScoping():
    res = runSolver("""(declare-const x Int)
(push 1)
(assert (< x 0))
(assert (< 0 x))
(check-sat)
(pop 1)
(check-sat)
""")
    assert res == ["unsat", "sat"]


def testTheoryCombination():
    # equality propagated from arithmetic into the function graph
    assert check("""(declare-const x Int)
(declare-const y Int)
(declare-fun f (Int) Int)
(assert (<= x y))
(assert (<= y x))
(assert (not (= (f x) (f y))))
""") == "unsat"
