"""SMT backend: encode predicates over EUF + linear integer arithmetic and
decide implications via an external solver subprocess speaking SMT-LIB2.

All values (ints, pointers, records, snapshots) share one Int value sort;
booleans are native.  Field is an uninterpreted (value, field) -> value
function with pairwise-distinct field-name constants; each measure is an
uninterpreted value -> value function whose null case is asserted as a
per-query axiom.  null is an unfixed Int constant.
"""

from __future__ import annotations

import os
import select
import subprocess
import sys
from typing import Iterable, Optional

from .core import (EBin, EBool, EField, EInt, EIte, EMeasure, ENot, ENull,
                   EVar, Expr, KappaApp, Measure, freeVars)


class BackendError(Exception):
    pass


# ---------------------------------------------------------------------------
# Encoding
# ---------------------------------------------------------------------------

_OPMAP = {"+": "+", "-": "-", "==": "=", "<=": "<=", "<": "<",
          ">=": ">=", ">": ">", "&&": "and", "||": "or"}


def fieldConst(fname: str) -> str:
    return "f$" + fname


def encodeTerm(e: Expr) -> str:
    if isinstance(e, EInt):
        return str(e.n) if e.n >= 0 else f"(- {-e.n})"
    if isinstance(e, ENull):
        return "null"
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, EField):
        return f"(Field {encodeTerm(e.value)} {fieldConst(e.fname)})"
    if isinstance(e, EMeasure):
        return f"({e.mname} {encodeTerm(e.arg)})"
    if isinstance(e, EBin) and e.op in ("+", "-"):
        return f"({e.op} {encodeTerm(e.lhs)} {encodeTerm(e.rhs)})"
    raise BackendError(f"unsortable term {e!r}")


def encodePred(e: Expr) -> str:
    """Encode a boolean predicate as SMT-LIB2 text."""
    if isinstance(e, EBool):
        return "true" if e.b else "false"
    if isinstance(e, EVar):
        return e.name  # opaque boolean variable
    if isinstance(e, ENot):
        return f"(not {encodePred(e.arg)})"
    if isinstance(e, EBin):
        if e.op == "!=":
            return f"(not (= {encodeTerm(e.lhs)} {encodeTerm(e.rhs)}))"
        if e.op in ("&&", "||"):
            return f"({_OPMAP[e.op]} {encodePred(e.lhs)} {encodePred(e.rhs)})"
        if e.op in ("==", "<=", "<", ">=", ">"):
            return f"({_OPMAP[e.op]} {encodeTerm(e.lhs)} {encodeTerm(e.rhs)})"
        raise BackendError(f"bad predicate op {e.op}")
    if isinstance(e, EIte):
        return (f"(ite {encodePred(e.cond)} {encodePred(e.then)}"
                f" {encodePred(e.els)})")
    if isinstance(e, KappaApp):
        raise BackendError(f"kappa {e.kid} reached the backend unexpanded")
    raise BackendError(f"unencodable predicate {e!r}")


def _collect(e: Expr, fields: set, measures: set):
    if isinstance(e, EField):
        fields.add(e.fname)
        _collect(e.value, fields, measures)
    elif isinstance(e, EMeasure):
        measures.add(e.mname)
        _collect(e.arg, fields, measures)
    elif isinstance(e, EBin):
        _collect(e.lhs, fields, measures)
        _collect(e.rhs, fields, measures)
    elif isinstance(e, ENot):
        _collect(e.arg, fields, measures)
    elif isinstance(e, EIte):
        for sub in (e.cond, e.then, e.els):
            _collect(sub, fields, measures)


def measureNullValue(m: Measure) -> Optional[int]:
    """The measure's null case, when it is a literal constant."""
    body = m.body
    if isinstance(body, EIte) and isinstance(body.then, EInt):
        return body.then.n
    return None


def buildQuery(preds: list, boolVars: set, measures: dict) -> str:
    """Declarations + axioms + assertions for a conjunction of predicates."""
    fields: set = set()
    ms: set = set()
    names: set = set()
    for p in preds:
        _collect(p, fields, ms)
        names |= freeVars(p)
    lines = []
    for n in sorted(names - {"null"}):
        sort = "Bool" if n in boolVars else "Int"
        lines.append(f"(declare-const {n} {sort})")
    lines.append("(declare-const null Int)")
    if fields or any(True for _ in ms):
        lines.append("(declare-fun Field (Int Int) Int)")
    for f in sorted(fields):
        lines.append(f"(declare-const {fieldConst(f)} Int)")
    if len(fields) > 1:
        flist = " ".join(fieldConst(f) for f in sorted(fields))
        lines.append(f"(assert (distinct {flist}))")
    for mname in sorted(ms):
        lines.append(f"(declare-fun {mname} (Int) Int)")
        m = measures.get(mname)
        if m is not None:
            c = measureNullValue(m)
            if c is not None:
                lines.append(f"(assert (= ({mname} null) {c}))")
    for p in preds:
        lines.append(f"(assert {encodePred(p)})")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Solver session
# ---------------------------------------------------------------------------

def defaultSolverCmd() -> list:
    env = os.environ.get("ART_SMT")
    if env:
        return env.split()
    return [sys.executable, "-m", "art.minismt"]


class Backend:
    """One long-lived solver process; queries bracketed by push/pop."""

    def __init__(self, cmd: Optional[list] = None, timeout: float = 5.0,
                 emitDir: Optional[str] = None, cache: bool = True):
        self.cmd = list(cmd) if cmd else defaultSolverCmd()
        self.timeout = timeout
        self.emitDir = emitDir
        self.proc: Optional[subprocess.Popen] = None
        self.cache: Optional[dict] = {} if cache else None
        self.nqueries = 0

    # -- process management -------------------------------------------------

    def _start(self):
        try:
            self.proc = subprocess.Popen(
                self.cmd, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, text=True)
        except OSError as e:
            raise BackendError(f"cannot start solver "
                               f"{' '.join(self.cmd)}: {e}") from e
        try:
            self._send("(set-logic QF_UFLIA)\n")
        except (BrokenPipeError, OSError):
            pass  # solver died immediately; the query path reports unknown

    def _stop(self):
        if self.proc is not None:
            try:
                self.proc.kill()
            except OSError:
                pass
            self.proc = None

    def close(self):
        if self.proc is not None:
            try:
                self.proc.stdin.write("(exit)\n")
                self.proc.stdin.flush()
            except (BrokenPipeError, OSError):
                pass
            self._stop()

    def _send(self, text: str):
        assert self.proc is not None
        self.proc.stdin.write(text)
        self.proc.stdin.flush()

    def _readline(self) -> Optional[str]:
        assert self.proc is not None
        ready, _, _ = select.select([self.proc.stdout], [], [], self.timeout)
        if not ready:
            return None
        return self.proc.stdout.readline()

    # -- queries ------------------------------------------------------------

    def rawCheckSat(self, body: str) -> str:
        """Run one bracketed query; body holds declarations + assertions.
        Returns sat | unsat | unknown."""
        if self.emitDir is not None:
            os.makedirs(self.emitDir, exist_ok=True)
            path = os.path.join(self.emitDir, f"query{self.nqueries:04d}.smt2")
            with open(path, "w") as fh:
                fh.write("(set-logic QF_UFLIA)\n(push 1)\n" + body +
                         "\n(check-sat)\n(pop 1)\n")
        self.nqueries += 1
        for attempt in (0, 1):
            if self.proc is None or self.proc.poll() is not None:
                self._stop()
                self._start()
            try:
                self._send("(push 1)\n" + body + "\n(check-sat)\n")
                line = self._readline()
            except (BrokenPipeError, OSError):
                line = None
            if line is None or line.strip() not in ("sat", "unsat", "unknown"):
                # timeout or desync: restart the session and retry once
                self._stop()
                if attempt == 1:
                    raise BackendError(
                        f"solver gave no answer: {' '.join(self.cmd)}")
                continue
            try:
                self._send("(pop 1)\n")
            except (BrokenPipeError, OSError):
                self._stop()
            return line.strip()
        return "unknown"

    def checkSat(self, preds: list, boolVars: set = frozenset(),
                 measures: dict = None) -> str:
        body = buildQuery(list(preds), set(boolVars), measures or {})
        if self.cache is not None and body in self.cache:
            return self.cache[body]
        res = self.rawCheckSat(body)
        if self.cache is not None:
            self.cache[body] = res
        return res

    def checkImpl(self, hyps: Iterable[Expr], lhs: Expr, rhs: Expr,
                  boolVars: set = frozenset(),
                  measures: dict = None) -> str:
        """valid | invalid | unknown for  hyps ∧ lhs => rhs."""
        preds = list(hyps) + [lhs, ENot(rhs)]
        res = self.checkSat(preds, boolVars, measures)
        if res == "unsat":
            return "valid"
        if res == "sat":
            return "invalid"
        return "unknown"
