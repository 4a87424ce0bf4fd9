"""Command-line driver.

    art [verify|elaborate|constraints|solution|audit] FILE [options]

verify is the default when no subcommand is given.  Exit codes: 0 for
success, 1 for a verification failure, 2 for an input error, 3 for a
backend or internal failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor

from .annotate import AliasError, elaborate
from .cgen import CGenError, cgenProgram, printClause
from .core import Program
from .frontend import ParseError, parseProgram, parseQualifiers, \
    printProgram, printSchema
from .hornsolve import SolveError, applySolution, canonSolution, solve
from .slaudit import AuditError, auditProgram
from .smtback import Backend, BackendError
from .wellformed import WFError, wfProgram

COMMANDS = ("verify", "elaborate", "constraints", "solution", "audit")


def buildParser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="art", description="refinement verifier for linked heaps")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("file")
    ap.add_argument("--qualifiers", metavar="FILE", default=None,
                    help="qualifier file for refinement inference")
    ap.add_argument("--smt", metavar="CMD", default=None,
                    help="solver command (overrides ART_SMT)")
    ap.add_argument("--emit-annotated", action="store_true",
                    help="print the elaborated program")
    ap.add_argument("--emit-constraints", action="store_true",
                    help="print the generated Horn clauses")
    ap.add_argument("--emit-solution", action="store_true",
                    help="print the raw kappa assignment")
    ap.add_argument("--emit-smt", metavar="DIR", default=None,
                    help="write each solver query to DIR")
    ap.add_argument("--json", action="store_true", dest="asJson",
                    help="machine-readable output")
    ap.add_argument("-j", type=int, default=1, metavar="N", dest="jobs",
                    help="number of solver processes")
    return ap


def parseArgs(argv) -> argparse.Namespace:
    argv = list(argv)
    rest = [a for a in argv if not a.startswith("-")]
    if not rest or rest[0] not in COMMANDS:
        argv.insert(0, "verify")
    return buildParser().parse_args(argv)


class _Pool:
    """Round-robin solver pool; independent checks run on worker
    threads, each with its own solver process."""

    def __init__(self, n: int, cmd, emitDir):
        cmdList = cmd.split() if cmd else None
        self.backends = [Backend(cmdList, emitDir=emitDir if i == 0 else
                                 None) for i in range(max(1, n))]
        self.i = 0

    def checkImpl(self, hyps, lhs, rhs, boolVars=frozenset(),
                  measures=None):
        b = self.backends[self.i % len(self.backends)]
        self.i += 1
        return b.checkImpl(hyps, lhs, rhs, boolVars, measures)

    def checkMany(self, jobs):
        if len(self.backends) == 1 or len(jobs) <= 1:
            return [self.checkImpl(*j) for j in jobs]
        with ThreadPoolExecutor(len(self.backends)) as ex:
            futs = [ex.submit(self.backends[i % len(self.backends)]
                              .checkImpl, *j)
                    for i, j in enumerate(jobs)]
            return [f.result() for f in futs]

    @property
    def nqueries(self):
        return sum(b.nqueries for b in self.backends)

    def close(self):
        for b in self.backends:
            b.close()


def loadProgram(path: str) -> Program:
    with open(path) as fh:
        src = fh.read()
    prog = parseProgram(src)
    wfProgram(prog)
    return prog


def loadQualifiers(path):
    if path is None:
        return []
    with open(path) as fh:
        return parseQualifiers(fh.read())


def run(argv=None) -> int:
    ns = parseArgs(sys.argv[1:] if argv is None else argv)
    out = {}
    try:
        prog = loadProgram(ns.file)
        quals = loadQualifiers(ns.qualifiers)
        annotated = elaborate(prog)
    except (OSError, ParseError, WFError, AliasError) as e:
        return _fail(ns, 2, f"input error: {e}")

    if ns.command == "elaborate":
        _emit(ns, out, "annotated", printProgram(annotated))
        return _finish(ns, 0, out, "elaborated")

    if ns.command == "audit":
        try:
            lines = auditProgram(annotated)
        except AuditError as e:
            return _fail(ns, 1, f"audit failure: {e}")
        _emit(ns, out, "audit", "\n".join(lines))
        return _finish(ns, 0, out, "audit ok")

    try:
        cs, schemas = cgenProgram(annotated)
    except CGenError as e:
        return _fail(ns, 2, f"input error: {e}")
    if ns.emit_annotated:
        _emit(ns, out, "annotated", printProgram(annotated))
    if ns.command == "constraints" or ns.emit_constraints:
        text = "\n".join(f"{printClause(c)}    ;; {c.provenance}"
                         for c in cs.clauses)
        _emit(ns, out, "constraints", text)
        if ns.command == "constraints":
            return _finish(ns, 0, out, f"{len(cs.clauses)} clauses")

    measures = {m.name: m for m in prog.measures}
    pool = _Pool(ns.jobs, ns.smt, ns.emit_smt)
    try:
        res = solve(cs, quals, pool, measures)
        if res.ok:
            canon = canonSolution(res.solution, pool, measures)
    except (SolveError, BackendError) as e:
        pool.close()
        return _fail(ns, 3, f"backend error: {e}")
    finally:
        pool.close()

    from .frontend import printExpr
    if ns.command == "solution" or ns.emit_solution:
        lines = []
        sol = res.solution
        for kid in sorted(sol.assignment):
            ps = (canon if res.ok else sol).assignment[kid]
            lines.append(f"{kid} := " +
                         (" && ".join(printExpr(q) for q in ps) or "true"))
        _emit(ns, out, "solution", "\n".join(lines))
        if ns.command == "solution" and res.ok:
            return _finish(ns, 0, out, "solved")

    if not res.ok:
        msg = (f"verification failure [{res.failed.provenance}]: "
               f"{printClause(res.failed)}")
        out["failed"] = {"clause": printClause(res.failed),
                         "provenance": res.failed.provenance}
        return _fail(ns, 1, msg, out)

    sigs = {}
    for fn in prog.functions:
        solved = applySolution(canon, schemas[fn.name])
        sigs[fn.name] = printSchema(solved)
    out["signatures"] = sigs
    text = "\n".join(f"{name}: {sig}" for name, sig in sigs.items())
    _emit(ns, out, "verified", text)
    return _finish(ns, 0, out, "ok")


def _emit(ns, out: dict, key: str, text: str):
    out[key] = text
    if not ns.asJson:
        print(text)


def _fail(ns, code: int, msg: str, out: dict = None) -> int:
    out = out or {}
    out["status"] = {1: "invalid", 2: "input-error", 3: "backend-error"}[code]
    out["message"] = msg
    if ns.asJson:
        print(json.dumps(out, indent=2))
    else:
        print(msg, file=sys.stderr)
    return code


def _finish(ns, code: int, out: dict, msg: str) -> int:
    out["status"] = "ok"
    out["message"] = msg
    if ns.asJson:
        print(json.dumps(out, indent=2))
    else:
        print(msg)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
