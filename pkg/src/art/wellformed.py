"""Well-formedness checks run before constraint generation.

These catch malformed inputs (unknown locations, arity errors, bad measure
shapes) so later phases can assume a sane program.  Violations raise
WFError, which the CLI reports as an input error.

Sorts classify logical values for qualifier instantiation: "int", "bool",
"ptr", a constructor name for folded snapshots, "rec" for raw records, and
"tyvar:A" for values of an uninstantiated type variable.  Qualifier sorts
only ever name the first four kinds, so record and type-variable binders
never match a qualifier wildcard.
"""

from __future__ import annotations

from .core import (BApp, BBool, BInt, BMaybeRef, BNullT, BRecord, BRef,
                   BTyVar, BaseType, EBin, EBool, EField, EInt, EIte,
                   EMeasure, ENot, ENull, ERecord, EVar, EWild, Expr,
                   FunDecl, Heap, KappaApp, Measure, Program, RefType,
                   SAlloc, SAssign, SCall, SConc, SFold, SIf, SPad, SRead,
                   SReturn, SUnfold, SWrite, Schema, TypeDef)

Sort = str


class WFError(Exception):
    pass


def snapTy(prog: Program, b: BaseType, visited: frozenset = frozenset()) -> Sort:
    """Sort of the logical snapshot of a value of base type b."""
    if isinstance(b, BInt):
        return "int"
    if isinstance(b, BBool):
        return "bool"
    if isinstance(b, (BNullT, BRef, BMaybeRef)):
        return "ptr"
    if isinstance(b, BTyVar):
        return "tyvar:" + b.name
    if isinstance(b, BRecord):
        return "rec"
    if isinstance(b, BApp):
        if b.con in visited:
            return b.con
        try:
            d = prog.typedef(b.con)
        except KeyError:
            raise WFError(f"unknown type constructor {b.con}")
        if len(b.args) != len(d.tyvars):
            raise WFError(f"{b.con} expects {len(d.tyvars)} type "
                          f"arguments, got {len(b.args)}")
        for a in b.args:
            snapTy(prog, a.base, visited | {b.con})
        return b.con
    raise WFError(f"unclassifiable base type {b!r}")


# ---------------------------------------------------------------------------
# Refinements
# ---------------------------------------------------------------------------

def _wfRefinement(prog: Program, e: Expr, allowWild: bool):
    if isinstance(e, (EInt, EBool, ENull, EVar, KappaApp)):
        return
    if isinstance(e, EWild):
        if not allowWild:
            raise WFError("wildcard outside a qualifier body")
        return
    if isinstance(e, EBin):
        _wfRefinement(prog, e.lhs, allowWild)
        _wfRefinement(prog, e.rhs, allowWild)
        return
    if isinstance(e, ENot):
        _wfRefinement(prog, e.arg, allowWild)
        return
    if isinstance(e, EField):
        _wfRefinement(prog, e.value, allowWild)
        return
    if isinstance(e, EMeasure):
        if all(m.name != e.mname for m in prog.measures):
            raise WFError(f"unknown measure {e.mname}")
        _wfRefinement(prog, e.arg, allowWild)
        return
    if isinstance(e, EIte):
        for sub in (e.cond, e.then, e.els):
            _wfRefinement(prog, sub, allowWild)
        return
    if isinstance(e, ERecord):
        raise WFError("record literal inside a refinement")
    raise WFError(f"ill-formed refinement {e!r}")


# ---------------------------------------------------------------------------
# Types, heaps, schemas
# ---------------------------------------------------------------------------

def wfType(prog: Program, t: RefType, locs: set, tyvars: set,
           allowWild: bool = False):
    b = t.base
    if isinstance(b, (BRef, BMaybeRef)):
        if b.loc not in locs:
            raise WFError(f"undeclared location {b.loc}")
    elif isinstance(b, BTyVar):
        if b.name not in tyvars:
            raise WFError(f"undeclared type variable {b.name}")
    elif isinstance(b, BRecord):
        seen = set()
        for f, ft in b.fields:
            if f in seen:
                raise WFError(f"duplicate record field {f}")
            seen.add(f)
            wfType(prog, ft, locs, tyvars, allowWild)
    elif isinstance(b, BApp):
        snapTy(prog, b)
        for a in b.args:
            wfType(prog, a, locs, tyvars, allowWild)
    _wfRefinement(prog, t.refinement, allowWild)


def wfHeap(prog: Program, h: Heap, locs: set, tyvars: set):
    for l, _, ty in h.bindings:
        if l not in locs:
            raise WFError(f"undeclared location {l}")
        wfType(prog, ty, locs, tyvars)


def wfSchema(prog: Program, s: Schema):
    names = [x for x, _ in s.args]
    if len(set(names)) != len(names):
        raise WFError("duplicate parameter name")
    locs = set(s.locs) | set(s.outLocs)
    tyvars = set(s.tyvars)
    for _, t in s.args:
        wfType(prog, t, set(s.locs), tyvars)
    wfHeap(prog, s.inHeap, set(s.locs), tyvars)
    wfHeap(prog, s.outHeap, locs, tyvars)
    wfType(prog, s.ret, locs, tyvars)
    for x, t in s.args:
        if isinstance(t.base, (BRef, BMaybeRef)) and \
                not s.inHeap.has(t.base.loc):
            raise WFError(f"parameter {x} points at {t.base.loc}, which the "
                          "input heap does not bind")
    if isinstance(s.ret.base, (BRef, BMaybeRef)) and \
            not s.outHeap.has(s.ret.base.loc):
        raise WFError(f"return type points at {s.ret.base.loc}, which the "
                      "output heap does not bind")


# ---------------------------------------------------------------------------
# Type definitions and measures
# ---------------------------------------------------------------------------

def wfTypeDef(prog: Program, d: TypeDef):
    if not isinstance(d.rootRecord.base, BRecord):
        raise WFError(f"type {d.name}: definition root must be a record")
    locs = set(d.exHeap.dom())
    tyvars = set(d.tyvars)
    wfType(prog, d.rootRecord, locs, tyvars)
    wfHeap(prog, d.exHeap, locs, tyvars)
    for m in d.measures:
        wfMeasure(prog, d, m)


def _rootFieldType(d: TypeDef, fname: str) -> RefType:
    for f, ft in d.rootRecord.base.fields:
        if f == fname:
            return ft
    raise WFError(f"type {d.name} has no field {fname}")


def wfMeasure(prog: Program, d: TypeDef, m: Measure):
    """A measure body is an if-expression on param == null whose else
    branch combines integers, data fields, and recursive calls on
    tail pointers."""
    body = m.body
    if not isinstance(body, EIte):
        raise WFError(f"measure {m.name}: body must case on null")
    cond = body.cond
    ok = (isinstance(cond, EBin) and cond.op == "=="
          and ((cond.lhs == EVar(m.param) and isinstance(cond.rhs, ENull))
               or (cond.rhs == EVar(m.param) and isinstance(cond.lhs, ENull))))
    if not ok:
        raise WFError(f"measure {m.name}: condition must test "
                      f"{m.param} == null")

    def walk(e: Expr):
        if isinstance(e, (EInt, EBool, ENull)):
            return
        if isinstance(e, EVar):
            if e.name != m.param:
                raise WFError(f"measure {m.name}: free variable {e.name}")
            return
        if isinstance(e, EBin):
            walk(e.lhs)
            walk(e.rhs)
            return
        if isinstance(e, ENot):
            walk(e.arg)
            return
        if isinstance(e, EField):
            if e.value != EVar(m.param):
                raise WFError(f"measure {m.name}: field access must be on "
                              f"{m.param}")
            _rootFieldType(d, e.fname)
            return
        if isinstance(e, EMeasure):
            if all(x.name != e.mname for x in prog.measures):
                raise WFError(f"unknown measure {e.mname}")
            if not isinstance(e.arg, EField):
                raise WFError(f"measure {m.name}: recursive call must take "
                              "a field")
            walk(e.arg)
            ft = _rootFieldType(d, e.arg.fname)
            if not isinstance(ft.base, (BRef, BMaybeRef)):
                raise WFError(f"measure {m.name}: recursive call on "
                              f"non-pointer field {e.arg.fname}")
            return
        raise WFError(f"measure {m.name}: bad body term {e!r}")

    walk(body.then)
    walk(body.els)


# ---------------------------------------------------------------------------
# Function bodies (scope check only; typing is constraint generation's job)
# ---------------------------------------------------------------------------

def _wfBody(prog: Program, fn: FunDecl, stmts: tuple, scope: set):
    def use(e: Expr):
        if isinstance(e, EVar):
            if e.name not in scope:
                raise WFError(f"{fn.name}: unbound variable {e.name}")
        elif isinstance(e, EBin):
            use(e.lhs)
            use(e.rhs)
        elif isinstance(e, ENot):
            use(e.arg)
        elif isinstance(e, ERecord):
            for _, x in e.fields:
                use(x)
        elif isinstance(e, (EInt, EBool, ENull)):
            pass
        else:
            raise WFError(f"{fn.name}: expression form {e!r} not allowed "
                          "in a statement")

    def define(x):
        if x in scope:
            raise WFError(f"{fn.name}: {x} defined twice")
        scope.add(x)

    for s in stmts:
        if isinstance(s, SAssign):
            use(s.e)
            define(s.x)
        elif isinstance(s, SRead):
            use(EVar(s.x))
            define(s.y)
        elif isinstance(s, SWrite):
            use(EVar(s.x))
            use(s.e)
        elif isinstance(s, SAlloc):
            for _, e in s.fields:
                use(e)
            define(s.x)
        elif isinstance(s, SCall):
            if s.fname != "assert":
                try:
                    prog.function(s.fname)
                except KeyError:
                    raise WFError(f"{fn.name}: call to unknown function "
                                  f"{s.fname}")
            for a in s.args:
                use(a)
            if s.x is not None:
                define(s.x)
        elif isinstance(s, SIf):
            use(s.cond)
            _wfBody(prog, fn, s.then, set(scope))
            _wfBody(prog, fn, s.els, set(scope))
        elif isinstance(s, SReturn):
            if s.e is not None:
                use(s.e)
        elif isinstance(s, (SUnfold, SFold, SPad)):
            pass
        elif isinstance(s, SConc):
            use(EVar(s.x))
        else:
            raise WFError(f"{fn.name}: unknown statement {s!r}")


def wfFunction(prog: Program, fn: FunDecl):
    wfSchema(prog, fn.schema)
    _wfBody(prog, fn, fn.body, set(fn.params))


def wfProgram(prog: Program):
    names = [d.name for d in prog.typedefs]
    if len(set(names)) != len(names):
        raise WFError("duplicate type definition")
    mnames = [m.name for m in prog.measures]
    if len(set(mnames)) != len(mnames):
        raise WFError("duplicate measure")
    for d in prog.typedefs:
        wfTypeDef(prog, d)
    for fn in prog.functions:
        wfFunction(prog, fn)
