"""Alias typing and automatic heap-annotation insertion.

A small physical (refinement-erased) type system tracks, per program
point, which variables point where and whether each heap cell is a folded
summary or a materialized record.  The same abstract interpreter runs in
two modes: ``elaborate`` inserts conc/unfold/fold/pad annotations where
the physical state demands them, and ``aliasCheck`` validates an already
annotated program, failing where an annotation is missing or unsound.

Cells holding anonymous records (allocated by a record literal written
directly into a field) have no owning variable and are consumed silently
when an enclosing structure is folded; cells owned by a variable must be
folded explicitly, in dependency order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (BApp, BBool, BInt, BMaybeRef, BNullT, BRecord, BRef,
                   BTyVar, BaseType, EBin, EBool, EInt, ENot, ENull,
                   ERecord, EVar, Expr, FunDecl, NameGen, Program, RefType,
                   SAlloc, SAssign, SCall, SConc, SFold, SIf, SPad, SRead,
                   SReturn, SUnfold, SWrite, Stmt, locsOf)

PAD = "pad"  # sentinel heap cell: location exists but holds no value yet


class AliasError(Exception):
    pass


# ---------------------------------------------------------------------------
# Erasure
# ---------------------------------------------------------------------------

def eraseBase(b: BaseType) -> BaseType:
    if isinstance(b, BRecord):
        return BRecord(tuple((f, RefType(eraseBase(t.base)))
                             for f, t in b.fields))
    if isinstance(b, BApp):
        return BApp(b.con, tuple(RefType(eraseBase(t.base)) for t in b.args))
    return b


def eraseAnnots(stmts: tuple) -> tuple:
    out = []
    for s in stmts:
        if isinstance(s, (SConc, SUnfold, SFold, SPad)):
            continue
        if isinstance(s, SIf):
            out.append(SIf(s.cond, eraseAnnots(s.then), eraseAnnots(s.els),
                           s.span))
        else:
            out.append(s)
    return tuple(out)


def eraseProgram(prog: Program) -> Program:
    return Program(prog.typedefs, prog.measures,
                   tuple(FunDecl(f.name, f.params, f.schema,
                                 eraseAnnots(f.body), f.span)
                         for f in prog.functions))


# ---------------------------------------------------------------------------
# Physical state
# ---------------------------------------------------------------------------

@dataclass
class PhysState:
    env: dict            # var -> erased BaseType
    heap: dict           # loc -> erased BaseType | PAD
    conc: set            # concretized locations
    unfolded: dict       # loc -> constructor name (the wound/unwound set)
    returned: bool = False

    def copy(self) -> "PhysState":
        return PhysState(dict(self.env), dict(self.heap), set(self.conc),
                         dict(self.unfolded), self.returned)


def _ownedLocs(env: dict) -> set:
    out = set()
    for t in env.values():
        if isinstance(t, (BRef, BMaybeRef)):
            out.add(t.loc)
    return out


# ---------------------------------------------------------------------------
# Unification of erased types (collects location and type-variable maps)
# ---------------------------------------------------------------------------

def _unify(formal: BaseType, actual: BaseType, lmap: dict, tmap: dict):
    if isinstance(formal, (BRef, BMaybeRef)) and \
            isinstance(actual, (BRef, BMaybeRef)):
        prev = lmap.get(formal.loc)
        if prev is not None and prev != actual.loc:
            raise AliasError(f"location {formal.loc} instantiated at both "
                             f"{prev} and {actual.loc}")
        lmap[formal.loc] = actual.loc
        return
    if isinstance(formal, (BRef, BMaybeRef)) and isinstance(actual, BNullT):
        return  # null passed for a maybe-pointer; location stays abstract
    if isinstance(formal, BTyVar):
        prev = tmap.get(formal.name)
        if prev is not None and prev != actual:
            raise AliasError(f"type variable {formal.name} instantiated "
                             "inconsistently")
        tmap[formal.name] = actual
        return
    if isinstance(formal, BApp) and isinstance(actual, BApp) and \
            formal.con == actual.con:
        for ft, at in zip(formal.args, actual.args):
            _unify(ft.base, at.base, lmap, tmap)
        return
    if isinstance(formal, BRecord) and isinstance(actual, BRecord):
        fa = dict(actual.fields)
        for f, ft in formal.fields:
            if f in fa:
                _unify(ft.base, fa[f].base, lmap, tmap)
        return
    if type(formal) is type(actual):
        return
    raise AliasError(f"cannot match {formal!r} against {actual!r}")


def _instErased(b: BaseType, lmap: dict, tmap: dict) -> BaseType:
    if isinstance(b, BRef):
        return BRef(lmap.get(b.loc, b.loc))
    if isinstance(b, BMaybeRef):
        return BMaybeRef(lmap.get(b.loc, b.loc))
    if isinstance(b, BTyVar):
        got = tmap.get(b.name)
        return got if got is not None else b
    if isinstance(b, BRecord):
        return BRecord(tuple((f, RefType(_instErased(t.base, lmap, tmap)))
                             for f, t in b.fields))
    if isinstance(b, BApp):
        return BApp(b.con, tuple(RefType(_instErased(t.base, lmap, tmap))
                                 for t in b.args))
    return b


# ---------------------------------------------------------------------------
# The interpreter
# ---------------------------------------------------------------------------

class Elaborator:
    def __init__(self, prog: Program, insert: bool):
        self.prog = prog
        self.insert = insert
        self.fn = None
        self.gen = None

    # -- typedef helpers ----------------------------------------------------

    def typedefForRecord(self, rec: BRecord):
        names = tuple(f for f, _ in rec.fields)
        for d in self.prog.typedefs:
            if tuple(f for f, _ in d.rootRecord.base.fields) == names:
                return d
        raise AliasError(f"no type definition matches record fields {names}")

    def unfoldCell(self, st: PhysState, loc: str):
        cell = st.heap.get(loc)
        if not isinstance(cell, BApp):
            raise AliasError(f"unfold({loc}): cell is not a folded summary")
        d = self.prog.typedef(cell.con)
        tmap = {tv: a.base for tv, a in zip(d.tyvars, cell.args)}
        lmap = {}
        for exLoc, binder, _ in d.exHeap.bindings:
            lmap[exLoc] = self.gen.fresh(binder, kind="location")
        rec = _instErased(eraseBase(d.rootRecord.base), lmap, tmap)
        st.heap[loc] = rec
        for exLoc, _, ty in d.exHeap.bindings:
            st.heap[lmap[exLoc]] = _instErased(eraseBase(ty.base), lmap, tmap)
        st.unfolded[loc] = cell.con

    def foldCell(self, st: PhysState, loc: str, top: bool = True):
        """Fold the record at loc into a summary, consuming the cells it
        reaches.  Nested folded summaries of the same shape are consumed
        whole; nested records fold recursively."""
        cell = st.heap.get(loc)
        if cell is None:
            raise AliasError(f"fold({loc}): location not in heap")
        if isinstance(cell, BApp):
            if not top:
                del st.heap[loc]
                return cell
            raise AliasError(f"fold({loc}): cell already folded")
        if not isinstance(cell, BRecord):
            raise AliasError(f"fold({loc}): cell is not a record")
        d = self.typedefForRecord(cell)
        tmap = {}
        exTypes = {l: ty for l, _, ty in d.exHeap.bindings}
        for (f, ft), (_, dt) in zip(cell.fields, d.rootRecord.base.fields):
            db = dt.base
            if isinstance(db, (BRef, BMaybeRef)):
                if isinstance(ft.base, (BRef, BMaybeRef)):
                    tail = self.foldCell(st, ft.base.loc, top=False)
                    want = eraseBase(exTypes[db.loc].base)
                    if isinstance(want, BApp):
                        if not isinstance(tail, BApp) or \
                                tail.con != want.con:
                            raise AliasError(
                                f"fold({loc}): field {f} tail is not a "
                                f"{want.con}")
                        _unify(want, tail, {}, tmap)
                elif isinstance(ft.base, BNullT):
                    pass
                else:
                    raise AliasError(f"fold({loc}): field {f} should be a "
                                     "pointer")
            elif isinstance(db, BTyVar):
                prev = tmap.get(db.name)
                if prev is not None and prev != ft.base:
                    raise AliasError(f"fold({loc}): inconsistent element "
                                     "types")
                tmap[db.name] = ft.base
            else:
                if eraseBase(db) != ft.base:
                    raise AliasError(f"fold({loc}): field {f} has the "
                                     "wrong shape")
        args = tuple(RefType(tmap.get(tv, BTyVar(tv))) for tv in d.tyvars)
        summary = BApp(d.name, args)
        if top:
            st.heap[loc] = summary
            st.conc.discard(loc)
            st.unfolded.pop(loc, None)
        else:
            del st.heap[loc]
        return summary

    # -- annotation computation --------------------------------------------

    def unfoldList(self, st: PhysState, x: str) -> list:
        """Annotations needed before accessing a field of x."""
        t = st.env.get(x)
        if not isinstance(t, (BRef, BMaybeRef)):
            raise AliasError(f"{x} is not a pointer")
        loc = t.loc
        cell = st.heap.get(loc)
        if cell is None or cell == PAD:
            raise AliasError(f"{x} points at {loc}, which holds no value")
        anns = []
        if isinstance(cell, BApp):
            if isinstance(t, BMaybeRef) and loc not in st.conc:
                anns.append(SConc(x))
            anns.append(SUnfold(loc))
        elif isinstance(t, BMaybeRef) and loc not in st.conc:
            anns.append(SConc(x))
        return anns

    def foldList(self, st: PhysState, target: dict) -> list:
        """Ordered folds making st.heap match target (loc -> erased type).
        Records reached from a fold target through variable-owned cells
        must be folded first."""
        owned = _ownedLocs(st.env)
        need = set()
        work = [l for l, ty in target.items()
                if isinstance(ty, BApp) and isinstance(st.heap.get(l),
                                                       BRecord)]
        while work:
            l = work.pop()
            if l in need:
                continue
            need.add(l)
            cell = st.heap[l]
            for _, ft in cell.fields:
                fb = ft.base
                if isinstance(fb, (BRef, BMaybeRef)) and \
                        fb.loc in owned and \
                        isinstance(st.heap.get(fb.loc), BRecord):
                    work.append(fb.loc)
        return self.foldOrder(st, need)

    def foldOrder(self, st: PhysState, locs: set) -> list:
        """Dependency order: a cell referencing another to-be-folded cell
        folds after it.  Ties break lexicographically."""
        def reaches(l):
            out = set()
            cell = st.heap.get(l)
            if isinstance(cell, BRecord):
                for _, ft in cell.fields:
                    if isinstance(ft.base, (BRef, BMaybeRef)):
                        out.add(ft.base.loc)
            return out

        pending = set(locs)
        order = []
        while pending:
            ready = sorted(l for l in pending
                           if not (reaches(l) & (pending - {l})))
            if not ready:
                raise AliasError("cyclic structure cannot be folded")
            order.append(ready[0])
            pending.remove(ready[0])
        return [SFold(l) for l in order]

    def padLocs(self, st: PhysState, targetDom) -> list:
        return [SPad(l) for l in sorted(targetDom)
                if l not in st.heap]

    # -- applying annotations ----------------------------------------------

    def applyAnn(self, st: PhysState, s: Stmt):
        if isinstance(s, SConc):
            t = st.env.get(s.x)
            if not isinstance(t, (BRef, BMaybeRef)):
                raise AliasError(f"conc({s.x}): not a pointer")
            if t.loc not in st.heap:
                raise AliasError(f"conc({s.x}): {t.loc} not in heap")
            st.conc.add(t.loc)
        elif isinstance(s, SUnfold):
            self.unfoldCell(st, s.loc)
        elif isinstance(s, SFold):
            self.foldCell(st, s.loc)
        elif isinstance(s, SPad):
            if s.loc in st.heap:
                raise AliasError(f"pad({s.loc}): location already bound")
            st.heap[s.loc] = PAD
        else:
            raise AliasError(f"not an annotation: {s!r}")

    # -- access preparation -------------------------------------------------

    def prepareAccess(self, st: PhysState, x: str, fname: str,
                      out: list):
        for ann in self.unfoldList(st, x):
            if not self.insert:
                raise AliasError(f"access to {x}.{fname} requires "
                                 f"{type(ann).__name__.lower()[1:]}")
            out.append(ann)
            self.applyAnn(st, ann)
        loc = st.env[x].loc
        cell = st.heap[loc]
        if not isinstance(cell, BRecord):
            raise AliasError(f"{x} does not point at a record")
        for f, ft in cell.fields:
            if f == fname:
                return loc, cell, ft.base
        raise AliasError(f"record at {loc} has no field {fname}")

    # -- expressions --------------------------------------------------------

    def typeOf(self, st: PhysState, e: Expr) -> BaseType:
        if isinstance(e, EInt):
            return BInt()
        if isinstance(e, EBool):
            return BBool()
        if isinstance(e, ENull):
            return BNullT()
        if isinstance(e, EVar):
            t = st.env.get(e.name)
            if t is None:
                raise AliasError(f"unbound variable {e.name}")
            return t
        if isinstance(e, EBin):
            if e.op in ("+", "-"):
                return BInt()
            return BBool()
        if isinstance(e, ENot):
            return BBool()
        raise AliasError(f"expression form {e!r} not allowed here")

    # -- heap agreement at calls and returns --------------------------------

    def matchTarget(self, st: PhysState, target: dict, what: str):
        for l, ty in target.items():
            cell = st.heap.get(l)
            if cell is None:
                raise AliasError(f"{what}: location {l} missing from heap")
            if cell == PAD:
                continue
            if isinstance(ty, BApp):
                if not (isinstance(cell, BApp) and cell.con == ty.con):
                    raise AliasError(f"{what}: {l} is not folded")
                _unify(ty, cell, {}, {})
            elif isinstance(ty, BRecord):
                if not isinstance(cell, BRecord):
                    raise AliasError(f"{what}: {l} is not a record")

    def settle(self, st: PhysState, target: dict, out: list, what: str):
        """Insert (or require) folds and pads bringing st up to target."""
        folds = self.foldList(st, target)
        pads = self.padLocs(st, target.keys())
        for ann in folds + pads:
            if not self.insert:
                raise AliasError(f"{what}: missing "
                                 f"{type(ann).__name__.lower()[1:]} "
                                 "annotation")
            out.append(ann)
            self.applyAnn(st, ann)
        self.matchTarget(st, target, what)

    # -- statements ---------------------------------------------------------

    def callTarget(self, st: PhysState, s: SCall):
        """Instantiated input heap, output heap, return type and location
        map for a call."""
        g = self.prog.function(s.fname)
        sch = g.schema
        if len(s.args) != len(sch.args):
            raise AliasError(f"{s.fname} expects {len(sch.args)} arguments")
        lmap, tmap = {}, {}
        for a, (_, ft) in zip(s.args, sch.args):
            _unify(ft.base, self.typeOf(st, a), lmap, tmap)
        # close the location map over the input heap; cells still awaiting
        # a fold have the wrong shape and are revisited after settling
        changed = True
        while changed:
            changed = False
            for l, _, ty in sch.inHeap.bindings:
                if l in lmap:
                    tb = st.heap.get(lmap[l])
                    eb = _instErased(eraseBase(ty.base), lmap, tmap)
                    if type(tb) is type(eb):
                        n = len(lmap) + len(tmap)
                        _unify(eb, tb, lmap, tmap)
                        changed |= len(lmap) + len(tmap) != n
        target = {}
        for l, _, ty in sch.inHeap.bindings:
            il = lmap.get(l, l)
            target[il] = _instErased(eraseBase(ty.base), lmap, tmap)
        return g, lmap, tmap, target

    def applyCall(self, st: PhysState, s: SCall, g, lmap, tmap, target):
        sch = g.schema
        for l in target:
            st.heap.pop(l, None)
            st.conc.discard(l)
            st.unfolded.pop(l, None)
        hint = s.x if s.x is not None else s.fname
        for l in sch.outLocs:
            if l not in lmap:
                lmap[l] = self.gen.fresh(hint, kind="location")
        for l, _, ty in sch.outHeap.bindings:
            il = lmap.get(l, l)
            st.heap[il] = _instErased(eraseBase(ty.base), lmap, tmap)
        if s.x is not None:
            rb = _instErased(eraseBase(sch.ret.base), lmap, tmap)
            st.env[s.x] = rb
            if isinstance(rb, BRef):
                st.conc.add(rb.loc)

    def returnTarget(self, st: PhysState, e):
        sch = self.fn.schema
        lmap, tmap = {}, {}
        if e is not None and not isinstance(sch.ret.base, BNullT):
            _unify(sch.ret.base, self.typeOf(st, e), lmap, tmap)
        target = {}
        for l, _, ty in sch.outHeap.bindings:
            il = lmap.get(l, l)
            target[il] = _instErased(eraseBase(ty.base), lmap, tmap)
        return target

    def stmt(self, st: PhysState, s: Stmt, out: list):
        if isinstance(s, (SConc, SUnfold, SFold, SPad)):
            self.applyAnn(st, s)
            out.append(s)
            return
        if isinstance(s, SAssign):
            st.env[s.x] = self.typeOf(st, s.e)
            out.append(s)
            return
        if isinstance(s, SRead):
            _, _, fb = self.prepareAccess(st, s.x, s.fname, out)
            st.env[s.y] = fb
            out.append(s)
            return
        if isinstance(s, SWrite):
            loc, cell, _ = self.prepareAccess(st, s.x, s.fname, out)
            if isinstance(s.e, ERecord):
                anon = self.gen.fresh("a", kind="location")
                st.heap[anon] = BRecord(tuple(
                    (f, RefType(self.typeOf(st, x))) for f, x in s.e.fields))
                newT = BRef(anon)
            else:
                newT = self.typeOf(st, s.e)
            st.heap[loc] = BRecord(tuple(
                (f, RefType(newT) if f == s.fname else ft)
                for f, ft in cell.fields))
            out.append(s)
            return
        if isinstance(s, SAlloc):
            loc = self.gen.fresh(s.x, kind="location")
            st.heap[loc] = BRecord(tuple(
                (f, RefType(self.typeOf(st, e))) for f, e in s.fields))
            st.env[s.x] = BRef(loc)
            out.append(s)
            return
        if isinstance(s, SCall):
            if s.fname == "assert":
                self.typeOf(st, s.args[0])
                out.append(s)
                return
            g, lmap, tmap, target = self.callTarget(st, s)
            self.settle(st, target, out, f"call to {s.fname}")
            for l, _, ty in g.schema.inHeap.bindings:
                cell = st.heap.get(lmap.get(l, l))
                if cell is not None and cell != PAD:
                    _unify(_instErased(eraseBase(ty.base), lmap, tmap),
                           cell, lmap, tmap)
            self.applyCall(st, s, g, lmap, tmap, target)
            out.append(s)
            return
        if isinstance(s, SReturn):
            if s.e is not None:
                self.typeOf(st, s.e)
            target = self.returnTarget(st, s.e)
            self.settle(st, target, out, "return")
            out.append(s)
            st.returned = True
            return
        if isinstance(s, SIf):
            self.typeOf(st, s.cond)
            self.ifStmt(st, s, out)
            return
        raise AliasError(f"unhandled statement {s!r}")

    def ifStmt(self, st: PhysState, s: SIf, out: list):
        preU = dict(st.unfolded)
        st1, st2 = st.copy(), st.copy()
        out1 = self.block(st1, s.then)
        out2 = self.block(st2, s.els)
        live = [b for b in (st1, st2) if not b.returned]
        if len(live) == 2:
            lAlias = {l for l in preU
                      if self.aliased(l, st1.heap, st2.heap)}
            for b, o in ((st1, out1), (st2, out2)):
                folds = self.foldOrder(
                    b, {l for l in (set(b.unfolded) - set(preU)) | lAlias
                        if isinstance(b.heap.get(l), BRecord)})
                pads = []
                for ann in folds:
                    if not self.insert:
                        raise AliasError("if: missing fold annotation")
                    o.append(ann)
                    self.applyAnn(b, ann)
            for b, other, o in ((st1, st2, out1), (st2, st1, out2)):
                for ann in self.padLocs(b, other.heap.keys()):
                    if not self.insert:
                        raise AliasError("if: missing pad annotation")
                    o.append(ann)
                    self.applyAnn(b, ann)
            self.joinInto(st, st1, st2)
            for l in lAlias:
                st.unfolded.pop(l, None)
        elif len(live) == 1:
            b = live[0]
            st.env, st.heap = b.env, b.heap
            st.conc, st.unfolded = b.conc, b.unfolded
        else:
            st.returned = True
        out.append(SIf(s.cond, tuple(out1), tuple(out2), s.span))

    def aliased(self, l: str, h1: dict, h2: dict) -> bool:
        c1, c2 = h1.get(l), h2.get(l)
        if not (isinstance(c1, BRecord) and isinstance(c2, BRecord)):
            return False
        f2 = dict(c2.fields)
        for f, ft in c1.fields:
            if f in f2:
                ls = locsOf(ft) | locsOf(f2[f])
                if len(ls) > 1:
                    return True
        return False

    def joinInto(self, st: PhysState, st1: PhysState, st2: PhysState):
        if set(st1.heap) != set(st2.heap):
            only = set(st1.heap) ^ set(st2.heap)
            raise AliasError(f"if: branch heaps disagree at {sorted(only)}")
        heap = {}
        for l in st1.heap:
            c1, c2 = st1.heap[l], st2.heap[l]
            if c1 == PAD:
                heap[l] = c2
            elif c2 == PAD:
                heap[l] = c1
            elif c1 == c2:
                heap[l] = c1
            else:
                raise AliasError(f"if: branch heaps disagree on the shape "
                                 f"at {l}")
        st.heap = heap
        st.env = {x: t for x, t in st1.env.items()
                  if st2.env.get(x) == t}
        st.conc = st1.conc & st2.conc
        st.unfolded = {l: c for l, c in st1.unfolded.items()
                       if st2.unfolded.get(l) == c}

    def block(self, st: PhysState, stmts: tuple) -> list:
        out = []
        for s in stmts:
            if st.returned:
                raise AliasError("unreachable code after return")
            self.stmt(st, s, out)
        return out

    # -- functions ----------------------------------------------------------

    def function(self, fn: FunDecl) -> FunDecl:
        self.fn = fn
        taken = set(fn.schema.locs) | set(fn.schema.outLocs)
        taken |= _allNames(fn.body) | set(fn.params)
        self.gen = NameGen(taken)
        st = PhysState(env={}, heap={}, conc=set(), unfolded={})
        for x, t in fn.schema.args:
            st.env[x] = eraseBase(t.base)
        for l, _, ty in fn.schema.inHeap.bindings:
            st.heap[l] = eraseBase(ty.base)
        body = self.block(st, fn.body)
        if not st.returned:
            if not isinstance(fn.schema.ret.base, BNullT):
                raise AliasError(f"{fn.name}: control may reach the end "
                                 "without returning a value")
            self.stmt(st, SReturn(None), body)
            body.pop()  # implicit return stays implicit
        return FunDecl(fn.name, fn.params, fn.schema, tuple(body), fn.span)


def _allNames(stmts) -> set:
    """Names introduced by non-annotation statements.  Annotations are
    excluded so that fresh-name generation is identical whether or not a
    program has already been elaborated."""
    out = set()
    for s in stmts:
        if isinstance(s, (SConc, SUnfold, SFold, SPad)):
            continue
        for attr in ("x", "y"):
            v = getattr(s, attr, None)
            if isinstance(v, str):
                out.add(v)
        if isinstance(s, SIf):
            out |= _allNames(s.then) | _allNames(s.els)
    return out


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------

def elaborate(prog: Program) -> Program:
    """Insert conc/unfold/fold/pad annotations throughout the program."""
    el = Elaborator(prog, insert=True)
    return Program(prog.typedefs, prog.measures,
                   tuple(el.function(f) for f in prog.functions))


def aliasCheck(prog: Program):
    """Check an annotated program against the alias type discipline."""
    el = Elaborator(prog, insert=False)
    for f in prog.functions:
        el.function(f)


def unfoldList(prog: Program, st: PhysState, x: str) -> list:
    return Elaborator(prog, insert=True).unfoldList(st, x)


def foldList(prog: Program, st: PhysState, target: dict) -> list:
    return Elaborator(prog, insert=True).foldList(st, target)


def padLocs(prog: Program, st: PhysState, targetDom) -> list:
    return Elaborator(prog, insert=True).padLocs(st, targetDom)


def annotateIf(prog: Program, st: PhysState, s: SIf) -> SIf:
    el = Elaborator(prog, insert=True)
    el.gen = NameGen(_allNames([s]) | set(st.env) | set(st.heap))
    out: list = []
    el.ifStmt(st, s, out)
    return out[-1]
