"""Horn-clause constraint generation from refinement typing.

Each function body is walked with a refined analog of the physical state:
a type environment of bindings and guards plus a refined heap.  Every
subtyping obligation becomes a Horn clause

    env |- lhs => head

where env is the encoded hypothesis set, lhs a predicate about the value
variable v, and head either a concrete predicate or an application of a
refinement variable (kappa) with a pending substitution.

Missing refinements in a function's output world are replaced by kappa
templates (mkTemplates); inputs keep their declared refinements.  The
environment encoding exposes, in order: refinements of local bindings,
guards, refinements of current heap bindings (applied to their binders),
and the identification of each live pointer with the snapshot binder at
its target location.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dfield

from .core import (BApp, BBool, BInt, BMaybeRef, BNullT, BRecord, BRef,
                   BTyVar, BaseType, EBin, EBool, EField, EInt, EMeasure,
                   ENot, ENull, ERecord, EVar, Expr, FunDecl, Heap,
                   HornClause, KappaApp, NU, NameGen, Program, RefType,
                   SAlloc, SAssign, SCall, SConc, SFold, SIf, SPad, SRead,
                   SReturn, SUnfold, SWrite, Schema, Stmt, TRUE, TypeDef,
                   TypeEnv, conj, conjuncts, eq, substExpr, substLocType,
                   substType, substTyVarType)
from .wellformed import snapTy


class CGenError(Exception):
    pass


# ---------------------------------------------------------------------------
# Worlds and constraint sets
# ---------------------------------------------------------------------------

@dataclass
class World:
    env: TypeEnv
    heap: Heap
    returned: bool = False

    def copy(self) -> "World":
        return World(self.env, self.heap, self.returned)


@dataclass
class ConstraintSet:
    clauses: list = dfield(default_factory=list)
    kappaSorts: dict = dfield(default_factory=dict)   # kid -> sort of v
    kappaScopes: dict = dfield(default_factory=dict)  # kid -> ((name, sort, kind), ...)

    def newKappa(self, gen: NameGen, vsort: str, scope) -> str:
        kid = gen.fresh("k1", kind="kappa")
        self.kappaSorts[kid] = vsort
        self.kappaScopes[kid] = tuple(scope)
        return kid

    def add(self, env, body: Expr, head: Expr, provenance: str):
        if head == TRUE:
            return
        self.clauses.append(HornClause(tuple(env), body, head, provenance))


def envPreds(world: World) -> list:
    """The hypothesis encoding of a world."""
    preds = []
    for item in world.env.items:
        if item[0] == "guard":
            preds.append(item[1])
        else:
            _, name, ty = item
            if ty.refinement != TRUE:
                preds.append(substExpr({"v": EVar(name)}, ty.refinement))
    for _, b, ty in world.heap.bindings:
        for p in _bindingFacts(b, ty):
            preds.append(p)
    for item in world.env.items:
        if item[0] == "bind" and isinstance(item[2].base, (BRef, BMaybeRef)):
            loc = item[2].base.loc
            if world.heap.has(loc):
                preds.append(eq(EVar(item[1]), EVar(world.heap.lookup(loc)[0])))
    return preds


def _trivial(p: Expr) -> bool:
    return isinstance(p, EBin) and p.op == "==" and p.lhs == p.rhs


def _bindingFacts(b: str, ty: RefType) -> list:
    out = []
    if ty.refinement != TRUE:
        out.extend(conjuncts(substExpr({"v": EVar(b)}, ty.refinement)))
    if isinstance(ty.base, BRecord):
        for f, ft in ty.base.fields:
            if ft.refinement != TRUE:
                out.extend(conjuncts(substExpr({"v": EField(EVar(b), f)},
                                               ft.refinement)))
    return [p for p in out if not _trivial(p)]


# ---------------------------------------------------------------------------
# Templates
# ---------------------------------------------------------------------------

def _templateType(prog, cs: ConstraintSet, gen, scope, t: RefType) -> RefType:
    """Replace missing refinements of an output position by kappas.
    Pointer-sorted and type-variable positions are never templated."""
    b = t.base
    if isinstance(b, BRecord):
        b = BRecord(tuple((f, _templateType(prog, cs, gen, scope, ft))
                          for f, ft in b.fields))
    elif isinstance(b, BApp):
        b = BApp(b.con, tuple(
            _templateType(prog, cs, gen, scope, a)
            if not isinstance(a.base, (BRef, BMaybeRef, BTyVar)) else a
            for a in b.args))
    r = t.refinement
    if r == TRUE and not isinstance(b, (BRef, BMaybeRef, BNullT, BRecord,
                                        BTyVar)):
        kid = cs.newKappa(gen, snapTy(prog, b), scope)
        r = KappaApp(kid)
    return RefType(b, r)


def mkTemplates(prog: Program, cs: ConstraintSet, gen: NameGen) -> dict:
    """Templated schema per function, in declaration order (kappa ids are
    assigned left to right through the program)."""
    out = {}
    for fn in prog.functions:
        sch = fn.schema
        scope = [(x, snapTy(prog, t.base), "var") for x, t in sch.args]
        scope += [(b, snapTy(prog, ty.base), "binder")
                  for _, b, ty in sch.inHeap.bindings]
        ret = _templateType(prog, cs, gen, scope, sch.ret)
        outH = Heap(tuple(
            (l, b, _templateType(prog, cs, gen, scope, ty))
            for l, b, ty in sch.outHeap.bindings))
        out[fn.name] = Schema(sch.locs, sch.tyvars, sch.args, sch.inHeap,
                              sch.outLocs, ret, outH)
    return out


# ---------------------------------------------------------------------------
# Subtyping
# ---------------------------------------------------------------------------

def subCon(cg, env, lhs: RefType, rhs: RefType, provenance: str,
           outer: bool = True):
    """Emit clauses for lhs <: rhs.  When outer is false the top-level
    refinement clause is skipped (the caller emits its own binding
    clause)."""
    lb, rb = lhs.base, rhs.base
    if outer and rhs.refinement != TRUE:
        cg.cs.add(env, lhs.refinement, rhs.refinement, provenance)
    if isinstance(lb, BMaybeRef) and isinstance(rb, BRef):
        cg.cs.add(env, lhs.refinement, ENot(eq(NU, ENull())), provenance)
    if isinstance(lb, BNullT) and isinstance(rb, (BMaybeRef, BNullT)):
        return
    if isinstance(lb, (BRef, BMaybeRef)) and isinstance(rb, (BRef, BMaybeRef)):
        if lb.loc != rb.loc:
            raise CGenError(f"pointer locations differ: {lb.loc} vs {rb.loc}")
        return
    if isinstance(lb, BApp) and isinstance(rb, BApp):
        if lb.con != rb.con:
            raise CGenError(f"constructors differ: {lb.con} vs {rb.con}")
        for la, ra in zip(lb.args, rb.args):
            subCon(cg, env, la, ra, provenance)
        return
    if isinstance(lb, BRecord) and isinstance(rb, BRecord):
        rf = dict(rb.fields)
        for f, ft in lb.fields:
            if f in rf:
                subCon(cg, env, ft, rf[f], provenance)
        return
    if type(lb) is type(rb):
        return
    raise CGenError(f"incompatible bases {lb!r} and {rb!r}")


def heapSubCon(cg, env, world: World, loc: str, binder: str, lhs: RefType,
               rhs: RefType, provenance: str):
    """One heap-binding obligation: the stored value, named v, must meet
    the super-binding's refinement.  The stored refinement itself is part
    of env already."""
    if rhs.refinement != TRUE:
        cg.cs.add(env, eq(NU, EVar(binder)), rhs.refinement, provenance)
    subCon(cg, env, lhs, rhs, provenance, outer=False)


# ---------------------------------------------------------------------------
# Measures
# ---------------------------------------------------------------------------

def instantiateMeasures(d: TypeDef, tailOf: dict) -> list:
    """(m, e_m) for each measure of d, where e_m is the measure body's
    non-null branch over a materialized record: recursive calls on tail
    fields become the tail's value (from tailOf), other field accesses
    become field projections of the record value given by tailOf[None]."""
    recordVal = tailOf[None]
    out = []
    for m in d.measures:
        body = m.body.els  # wellformed: an ite on param == null

        def walk(e: Expr) -> Expr:
            if isinstance(e, EMeasure) and isinstance(e.arg, EField):
                return EMeasure(e.mname, tailOf[e.arg.fname])
            if isinstance(e, EField) and e.value == EVar(m.param):
                return EField(recordVal, e.fname)
            if isinstance(e, EVar) and e.name == m.param:
                return recordVal
            if isinstance(e, EBin):
                return EBin(e.op, walk(e.lhs), walk(e.rhs))
            if isinstance(e, ENot):
                return ENot(walk(e.arg))
            return e

        out.append((m.name, walk(body)))
    return out


# ---------------------------------------------------------------------------
# The generator
# ---------------------------------------------------------------------------

def freshBinder(gen: NameGen, hint: str) -> str:
    """Snapshot binders are always digit-suffixed, starting at 0."""
    base = hint.rstrip("0123456789") or hint
    i = 0
    while f"{base}{i}" in gen.taken:
        i += 1
    name = f"{base}{i}"
    gen.taken.add(name)
    return name


class CGen:
    def __init__(self, prog: Program, foldNullGuard: bool = True):
        self.prog = prog
        self.cs = ConstraintSet()
        self.gen = None
        self.foldNullGuard = foldNullGuard
        self.schemas = None
        self.fn = None

    def run(self) -> ConstraintSet:
        gen = NameGen()
        self.schemas = mkTemplates(self.prog, self.cs, gen)
        for fn in self.prog.functions:
            self.function(fn)
        return self.cs

    # -- helpers ------------------------------------------------------------

    def sortOf(self, b: BaseType) -> str:
        return snapTy(self.prog, b)

    def scopeOf(self, w: World) -> list:
        out = []
        for item in w.env.items:
            if item[0] == "bind":
                out.append((item[1], self.sortOf(item[2].base), "var"))
        for _, b, ty in w.heap.bindings:
            out.append((b, self.sortOf(ty.base), "binder"))
        return out

    def typeOf(self, w: World, e: Expr) -> RefType:
        """Singleton-refined type of a program expression."""
        if isinstance(e, EInt):
            return RefType(BInt(), eq(NU, e))
        if isinstance(e, EBool):
            return RefType(BBool(), eq(NU, e))
        if isinstance(e, ENull):
            return RefType(BNullT(), eq(NU, ENull()))
        if isinstance(e, EVar):
            t = w.env.lookup(e.name)
            return RefType(t.base, eq(NU, e))
        if isinstance(e, EBin):
            base = BInt() if e.op in ("+", "-") else BBool()
            if e.op in ("+", "-", "==", "!=", "<=", "<", ">=", ">"):
                return RefType(base, eq(NU, e))
            return RefType(base)
        if isinstance(e, ENot):
            return RefType(BBool())
        raise CGenError(f"untypable expression {e!r}")

    def commitFacts(self, w: World, loc: str) -> World:
        """Preserve a heap binding's value facts before it is consumed.
        Snapshot facts stay true forever; the identification of a pointer
        with its cell's snapshot does not, so it is computed per clause
        from the current heap and never persisted."""
        b, ty = w.heap.lookup(loc)
        env = w.env
        for p in _bindingFacts(b, ty):
            env = env.guard(p)
        return World(env, w.heap, w.returned)

    # -- conc / unfold / fold / pad ----------------------------------------

    def doConc(self, w: World, s: SConc) -> World:
        t = w.env.lookup(s.x)
        if not isinstance(t.base, (BRef, BMaybeRef)):
            raise CGenError(f"conc({s.x}): not a pointer")
        loc = t.base.loc
        b, ty = w.heap.lookup(loc)
        if isinstance(t.base, BMaybeRef):
            self.cs.add(envPreds(w), eq(NU, EVar(s.x)),
                        ENot(eq(NU, ENull())), f"conc({s.x})")
        env = w.env
        if env.lookupOpt(b) is None:
            env = env.bind(b, ty)
        return World(env, w.heap, w.returned)

    def doUnfold(self, w: World, s: SUnfold) -> World:
        bOld, tyOld = w.heap.lookup(s.loc)
        if not isinstance(tyOld.base, BApp):
            raise CGenError(f"unfold({s.loc}): not a summary")
        d = self.prog.typedef(tyOld.base.con)
        w = self.commitFacts(w, s.loc)
        tmap = {tv: a for tv, a in zip(d.tyvars, tyOld.base.args)}
        lmap = {}
        for exLoc, binder, _ in d.exHeap.bindings:
            lmap[exLoc] = self.gen.fresh(binder, kind="location")
        bNew = freshBinder(self.gen, s.loc.lstrip("&"))
        tailBinder = {}
        heap = w.heap
        fields = []
        for f, ft in d.rootRecord.base.fields:
            ft = substLocType(lmap, substTyVarType(tmap, ft))
            fields.append((f, ft.refined(eq(NU, EField(EVar(bNew), f)))))
        heap = heap.update(s.loc, bNew, RefType(BRecord(tuple(fields))))
        for exLoc, binder, ety in d.exHeap.bindings:
            ety = substLocType(lmap, substTyVarType(tmap, ety))
            tb = freshBinder(self.gen, binder)
            tailBinder[exLoc] = tb
            heap = heap.bind(lmap[exLoc], tb, ety)
        env = w.env
        tailOf = {None: EVar(bNew)}
        for f, ft in d.rootRecord.base.fields:
            if isinstance(ft.base, (BRef, BMaybeRef)):
                tailOf[f] = EVar(tailBinder[ft.base.loc])
        for mname, em in instantiateMeasures(d, tailOf):
            env = env.guard(eq(EMeasure(mname, EVar(bOld)), em))
        return World(env, heap, w.returned)

    def foldTarget(self, w: World, loc: str) -> BApp:
        """The constructor application a cell folds into: the declared
        output binding when the location is part of this function's
        output world, otherwise the erased application."""
        sch = self.schemas[self.fn.name]
        if sch.outHeap.has(loc):
            _, ty = sch.outHeap.lookup(loc)
            if isinstance(ty.base, BApp):
                return ty.base
        _, tyRec = w.heap.lookup(loc)
        d = self.typedefForRecord(tyRec.base)
        tmap = {}
        for (f, ft), (_, dt) in zip(tyRec.base.fields,
                                    d.rootRecord.base.fields):
            if isinstance(dt.base, BTyVar):
                tmap.setdefault(dt.base.name,
                                RefType(_erase(ft.base)))
        args = tuple(tmap.get(tv, RefType(BTyVar(tv))) for tv in d.tyvars)
        return BApp(d.name, args)

    def typedefForRecord(self, rec: BaseType) -> TypeDef:
        if not isinstance(rec, BRecord):
            raise CGenError("fold of a non-record cell")
        names = tuple(f for f, _ in rec.fields)
        for d in self.prog.typedefs:
            if tuple(f for f, _ in d.rootRecord.base.fields) == names:
                return d
        raise CGenError(f"no type definition matches fields {names}")

    def doFold(self, w: World, s: SFold) -> World:
        target = self.foldTarget(w, s.loc)
        d = self.prog.typedef(target.con)
        prov = f"fold({s.loc})"
        env = envPreds(w)
        w2, tailOf = self.foldCell(w, s.loc, target, env, [], prov,
                                   top=True)
        bNew = freshBinder(self.gen, s.loc.lstrip("&"))
        eqs = conj([eq(EMeasure(mn, NU), em)
                    for mn, em in instantiateMeasures(d, tailOf)])
        heap = w2.heap.bind(s.loc, bNew, RefType(target, eqs))
        return World(w2.env, heap, w.returned)

    def foldCell(self, w: World, loc: str, target: BApp, env, guards,
                 prov: str, top: bool):
        """Emit fold obligations for the record at loc against target and
        consume the cells it reaches.  Returns the world without those
        cells and the tailOf map for measure instantiation."""
        d = self.prog.typedef(target.con)
        tmap = {tv: a for tv, a in zip(d.tyvars, target.args)}
        bRec, tyRec = w.heap.lookup(loc)
        if not isinstance(tyRec.base, BRecord):
            raise CGenError(f"{prov}: cell at {loc} is not a record")
        w = self.commitFacts(w, loc)
        heap = w.heap.remove(loc)
        w = World(w.env, heap, w.returned)
        tailOf = {None: EVar(bRec)}
        envG = list(env) + guards
        exTypes = {l: ty for l, _, ty in d.exHeap.bindings}
        for (f, ft), (_, dt) in zip(tyRec.base.fields,
                                    d.rootRecord.base.fields):
            db = substTyVarType(tmap, dt)
            if isinstance(db.base, (BRef, BMaybeRef)):
                want = substTyVarType(tmap, exTypes[db.base.loc])
                if isinstance(ft.base, BNullT):
                    if isinstance(db.base, BRef):
                        raise CGenError(f"{prov}: field {f} must not be "
                                        "null")
                    tailOf[f] = ENull()
                    continue
                if not isinstance(ft.base, (BRef, BMaybeRef)):
                    raise CGenError(f"{prov}: field {f} is not a pointer")
                g = list(guards)
                if isinstance(ft.base, BMaybeRef) and self.foldNullGuard:
                    g.append(ENot(eq(EField(EVar(bRec), f), ENull())))
                w, tailOf[f] = self.foldTail(w, ft.base.loc, want, env, g,
                                             prov)
            else:
                if db.refinement != TRUE:
                    self.cs.add(envG, ft.refinement, db.refinement, prov)
                subCon(self, envG, ft, db, prov, outer=False)
                tailOf[f] = EField(EVar(bRec), f)
        return w, tailOf

    def foldTail(self, w: World, loc: str, want: RefType, env, guards,
                 prov: str):
        """Consume the cell at loc as the tail of a fold."""
        b, ty = w.heap.lookup(loc)
        if isinstance(ty.base, BApp):
            if not (isinstance(want.base, BApp)
                    and want.base.con == ty.base.con):
                raise CGenError(f"{prov}: tail at {loc} has the wrong "
                                "constructor")
            w = self.commitFacts(w, loc)
            envG = list(env) + guards
            subCon(self, envG, ty, want, prov, outer=False)
            if want.refinement != TRUE:
                self.cs.add(envG, eq(NU, EVar(b)), want.refinement, prov)
            return World(w.env, w.heap.remove(loc), w.returned), EVar(b)
        if isinstance(ty.base, BRecord):
            if not isinstance(want.base, BApp):
                raise CGenError(f"{prov}: record tail folds into a "
                                "constructor only")
            w, tailOf = self.foldCell(w, loc, want.base, env, guards, prov,
                                      top=False)
            d = self.prog.typedef(want.base.con)
            bSnap = freshBinder(self.gen, loc.lstrip("&"))
            env2 = w.env
            for mn, em in instantiateMeasures(d, tailOf):
                env2 = env2.guard(eq(EMeasure(mn, EVar(bSnap)), em))
            return World(env2, w.heap, w.returned), EVar(bSnap)
        raise CGenError(f"{prov}: tail at {loc} is not foldable")

    def doPad(self, w: World, s: SPad) -> World:
        sch = self.schemas[self.fn.name]
        if sch.outHeap.has(s.loc):
            _, ty = sch.outHeap.lookup(s.loc)
        else:
            kid = self.cs.newKappa(self.gen, "int", self.scopeOf(w))
            ty = RefType(BInt(), KappaApp(kid))
        b = freshBinder(self.gen, s.loc.lstrip("&") + "p")
        # The producer obligation: padding is justified only when the
        # missing value is null.  Emitted against the world before the
        # binding exists, so the obligation cannot support itself.
        if ty.refinement != TRUE:
            self.cs.add(envPreds(w), eq(NU, ENull()), ty.refinement,
                        f"pad({s.loc})")
        heap = w.heap.bind(s.loc, b, ty)
        return World(w.env, heap, w.returned)

    # -- statements ---------------------------------------------------------

    def accessCell(self, w: World, x: str):
        t = w.env.lookup(x)
        if not isinstance(t.base, (BRef, BMaybeRef)):
            raise CGenError(f"{x} is not a pointer")
        loc = t.base.loc
        b, ty = w.heap.lookup(loc)
        if not isinstance(ty.base, BRecord):
            raise CGenError(f"access through {x} before unfold at {loc}")
        return loc, b, ty

    def stmt(self, w: World, s: Stmt) -> World:
        if isinstance(s, SConc):
            return self.doConc(w, s)
        if isinstance(s, SUnfold):
            return self.doUnfold(w, s)
        if isinstance(s, SFold):
            return self.doFold(w, s)
        if isinstance(s, SPad):
            return self.doPad(w, s)
        if isinstance(s, SAssign):
            t = self.typeOf(w, s.e)
            return World(w.env.bind(s.x, t), w.heap, w.returned)
        if isinstance(s, SRead):
            loc, b, ty = self.accessCell(w, s.x)
            for f, ft in ty.base.fields:
                if f == s.fname:
                    t = RefType(ft.base, eq(NU, EField(EVar(b), s.fname)))
                    return World(w.env.bind(s.y, t), w.heap, w.returned)
            raise CGenError(f"no field {s.fname} at {loc}")
        if isinstance(s, SWrite):
            return self.doWrite(w, s)
        if isinstance(s, SAlloc):
            loc = self.gen.fresh(s.x, kind="location")
            b = freshBinder(self.gen, s.x)
            fields = tuple(
                (f, self.nameField(w, b, f, self.typeOf(w, e)))
                for f, e in s.fields)
            heap = w.heap.bind(loc, b, RefType(BRecord(fields)))
            env = w.env.bind(s.x, RefType(BRef(loc)))
            return World(env, heap, w.returned)
        if isinstance(s, SCall):
            if s.fname == "assert":
                self.cs.add(envPreds(w), TRUE, s.args[0], "assert")
                return w
            return self.doCall(w, s)
        if isinstance(s, SReturn):
            return self.doReturn(w, s)
        if isinstance(s, SIf):
            return self.doIf(w, s)
        raise CGenError(f"unhandled statement {s!r}")

    def nameField(self, w: World, root: str, f: str, t: RefType) -> RefType:
        return RefType(t.base, conj([t.refinement,
                                     eq(NU, EField(EVar(root), f))]))

    def doWrite(self, w: World, s: SWrite) -> World:
        loc, bOld, ty = self.accessCell(w, s.x)
        if isinstance(s.e, ERecord):
            anonLoc = self.gen.fresh("a", kind="location")
            anonB = freshBinder(self.gen, "a")
            afields = tuple(
                (f, self.nameField(w, anonB, f, self.typeOf(w, e)))
                for f, e in s.e.fields)
            heap = w.heap.bind(anonLoc, anonB, RefType(BRecord(afields)))
            w = World(w.env, heap, w.returned)
            newT = RefType(BRef(anonLoc))
        else:
            newT = self.typeOf(w, s.e)
        w = self.commitFacts(w, loc)
        z = freshBinder(self.gen, loc.lstrip("&"))
        fields = []
        for f, ft in ty.base.fields:
            if f == s.fname:
                fields.append((f, self.nameField(w, z, f, newT)))
            else:
                fields.append((f, self.nameField(
                    w, z, f, RefType(ft.base, eq(NU, EField(EVar(bOld),
                                                            f))))))
        heap = w.heap.update(loc, z, RefType(BRecord(tuple(fields))))
        return World(w.env, heap, w.returned)

    # -- calls and returns --------------------------------------------------

    def finst(self, w: World, s: SCall, sch: Schema):
        """Location and type-variable instantiation for a call site."""
        lmap, tmap = {}, {}

        def unify(fb: BaseType, ab: BaseType):
            if isinstance(fb, (BRef, BMaybeRef)) and \
                    isinstance(ab, (BRef, BMaybeRef)):
                prev = lmap.get(fb.loc)
                if prev is not None and prev != ab.loc:
                    raise CGenError("inconsistent location instantiation")
                lmap[fb.loc] = ab.loc
            elif isinstance(fb, BTyVar):
                tmap.setdefault(fb.name, RefType(_erase(ab)))
            elif isinstance(fb, BApp) and isinstance(ab, BApp):
                for fa, aa in zip(fb.args, ab.args):
                    unify(fa.base, aa.base)

        for a, (_, ft) in zip(s.args, sch.args):
            unify(ft.base, self.typeOf(w, a).base)
        changed = True
        while changed:
            changed = False
            for l, _, ty in sch.inHeap.bindings:
                if l in lmap and w.heap.has(lmap[l]):
                    n = len(lmap) + len(tmap)
                    unify(substTyVarType(tmap, ty).base,
                          w.heap.lookup(lmap[l])[1].base)
                    changed |= len(lmap) + len(tmap) != n
        hint = s.x if s.x is not None else s.fname
        for l in sch.outLocs:
            if l not in lmap:
                lmap[l] = self.gen.fresh(hint, kind="location")
        return lmap, tmap

    def doCall(self, w: World, s: SCall) -> World:
        g = self.prog.function(s.fname)
        sch = self.schemas[s.fname]
        if len(s.args) != len(sch.args):
            raise CGenError(f"{s.fname}: wrong number of arguments")
        lmap, tmap = self.finst(w, s, sch)

        def inst(ty: RefType) -> RefType:
            return substLocType(lmap, substTyVarType(tmap, ty))

        theta = {x: a for (x, _), a in zip(sch.args, s.args)}
        env = envPreds(w)
        for a, (xf, ft) in zip(s.args, sch.args):
            want = substType(theta, inst(ft))
            subCon(self, env, self.typeOf(w, a), want,
                   f"call {s.fname} arg {xf}")
        heap = w.heap
        envN = w.env
        for l, fb, fty in sch.inHeap.bindings:
            al = lmap.get(l, l)
            if not heap.has(al):
                raise CGenError(f"call {s.fname}: heap at {al} missing")
            ab, aty = heap.lookup(al)
            want = substType(theta, inst(fty))
            heapSubCon(self, env, w, al, ab, aty, want,
                       f"call {s.fname} heap {l}")
            theta[fb] = EVar(ab)
            wc = self.commitFacts(World(envN, heap, w.returned), al)
            envN, heap = wc.env, wc.heap.remove(al)
        retLoc = sch.ret.base.loc \
            if isinstance(sch.ret.base, (BRef, BMaybeRef)) else None
        for l, ob, oty in sch.outHeap.bindings:
            il = lmap.get(l, l)
            hint = s.x if s.x is not None and l == retLoc else ob
            nb = freshBinder(self.gen, hint)
            heap = heap.bind(il, nb, substType(theta, inst(oty)))
            theta[ob] = EVar(nb)
        if s.x is not None:
            envN = envN.bind(s.x, substType(theta, inst(sch.ret)))
        return World(envN, heap, w.returned)

    def doReturn(self, w: World, s: SReturn) -> World:
        sch = self.schemas[self.fn.name]
        lmap = {}
        valT = None
        if s.e is not None:
            valT = self.typeOf(w, s.e)
            if isinstance(sch.ret.base, (BRef, BMaybeRef)) and \
                    isinstance(valT.base, (BRef, BMaybeRef)):
                lmap[sch.ret.base.loc] = valT.base.loc
        env = w.env
        for lf, ob, oty in sch.outHeap.bindings:
            la = lmap.get(lf, lf)
            if s.e is not None and isinstance(s.e, ENull) and \
                    isinstance(sch.ret.base, (BRef, BMaybeRef)) and \
                    sch.ret.base.loc == lf and w.heap.has(la):
                env = env.guard(eq(EVar(w.heap.lookup(la)[0]), ENull()))
        w = World(env, w.heap, w.returned)
        envP = envPreds(w)
        if s.e is not None and not isinstance(sch.ret.base, BNullT):
            want = substLocType(lmap, sch.ret)
            subCon(self, envP, valT, want, "return value")
        theta = {}
        for lf, ob, oty in sch.outHeap.bindings:
            la = lmap.get(lf, lf)
            if not w.heap.has(la):
                raise CGenError(f"return: output location {la} missing")
            ab, aty = w.heap.lookup(la)
            want = substExpr(theta, substLocType(lmap, oty).refinement)
            heapSubCon(self, envP, w, la, ab, aty,
                       RefType(substLocType(lmap, oty).base, want),
                       "return heap")
            theta[ob] = EVar(ab)
        return World(w.env, w.heap, True)

    # -- control flow -------------------------------------------------------

    def doIf(self, w: World, s: SIf) -> World:
        w1 = World(w.env.guard(s.cond), w.heap)
        w2 = World(w.env.guard(ENot(s.cond)), w.heap)
        for st in s.then:
            w1 = self.stmt(w1, st)
        for st in s.els:
            w2 = self.stmt(w2, st)
        live = [b for b in (w1, w2) if not b.returned]
        if not live:
            return World(w.env, w.heap, True)
        if len(live) == 1:
            return live[0]
        return self.joinWorlds(w, w1, w2)

    def joinWorlds(self, w: World, w1: World, w2: World) -> World:
        if set(w1.heap.dom()) != set(w2.heap.dom()):
            raise CGenError("if: branch heap domains differ")
        heap = Heap()
        for l in w1.heap.dom():
            b1, t1 = w1.heap.lookup(l)
            b2, t2 = w2.heap.lookup(l)
            if _erase(t1.base) != _erase(t2.base):
                raise CGenError(f"if: branch shapes differ at {l}")
            if (b1, t1) == (b2, t2):
                heap = heap.bind(l, b1, t1)
            else:
                nb = freshBinder(self.gen, l.lstrip("&"))
                heap = heap.bind(l, nb, RefType(_erase(t1.base)))
        return World(w.env, heap, False)

    # -- functions ----------------------------------------------------------

    def function(self, fn: FunDecl):
        self.fn = fn
        sch = self.schemas[fn.name]
        taken = set(sch.locs) | set(sch.outLocs) | set(fn.params)
        taken |= _stmtNames(fn.body)
        taken |= {b for _, b, _ in sch.inHeap.bindings}
        taken |= {b for _, b, _ in sch.outHeap.bindings}
        self.gen = NameGen(taken)
        env = TypeEnv()
        for x, t in sch.args:
            env = env.bind(x, t)
        w = World(env, sch.inHeap)
        for s in fn.body:
            if w.returned:
                raise CGenError("unreachable code after return")
            w = self.stmt(w, s)
        if not w.returned:
            if not isinstance(sch.ret.base, BNullT):
                raise CGenError(f"{fn.name}: missing return")
            self.stmt(w, SReturn(None))


def _stmtNames(stmts) -> set:
    out = set()
    for s in stmts:
        if isinstance(s, (SConc, SUnfold, SFold, SPad)):
            continue
        for attr in ("x", "y"):
            v = getattr(s, attr, None)
            if isinstance(v, str):
                out.add(v)
        if isinstance(s, SIf):
            out |= _stmtNames(s.then) | _stmtNames(s.els)
    return out


def _erase(b: BaseType) -> BaseType:
    if isinstance(b, BRecord):
        return BRecord(tuple((f, RefType(_erase(t.base)))
                             for f, t in b.fields))
    if isinstance(b, BApp):
        return BApp(b.con, tuple(RefType(_erase(t.base)) for t in b.args))
    return b


def cgenProgram(prog: Program, foldNullGuard: bool = True) -> tuple:
    """Constraints for an elaborated program: (ConstraintSet, schemas)."""
    cg = CGen(prog, foldNullGuard=foldNullGuard)
    cs = cg.run()
    return cs, cg.schemas


# ---------------------------------------------------------------------------
# Printing and canonicalization
# ---------------------------------------------------------------------------

def printPred(e: Expr) -> str:
    from .frontend import printExpr
    if isinstance(e, KappaApp):
        inner = ", ".join(f"{n} := {printPred(x)}" for n, x in e.pending)
        return f"{e.kid}[{inner}]" if inner else e.kid
    if isinstance(e, EBin) and e.op in ("&&", "||"):
        return (f"{printPred(e.lhs)} {e.op} {printPred(e.rhs)}")
    return printExpr(e)


def printClause(c: HornClause) -> str:
    env = ", ".join(printPred(p) for p in c.env) or "true"
    return f"{env} |- {printPred(c.body)} => {printPred(c.head)}"


def canonClause(c: HornClause) -> str:
    """Clause text with binders renamed in order of first appearance,
    for comparison modulo alpha-renaming."""
    names = {}

    def rn(n: str) -> str:
        if n in ("v", "null"):
            return n
        if n[:1] == "k" and n[1:].isdigit():
            return n
        if n not in names:
            names[n] = f"b{len(names)}"
        return names[n]

    def walk(e: Expr) -> Expr:
        if isinstance(e, EVar):
            return EVar(rn(e.name))
        if isinstance(e, EBin):
            return EBin(e.op, walk(e.lhs), walk(e.rhs))
        if isinstance(e, ENot):
            return ENot(walk(e.arg))
        if isinstance(e, EField):
            return EField(walk(e.value), e.fname)
        if isinstance(e, EMeasure):
            return EMeasure(e.mname, walk(e.arg))
        if isinstance(e, KappaApp):
            return KappaApp(e.kid, tuple((rn(n), walk(x))
                                         for n, x in e.pending))
        return e

    env = [printPred(walk(p)) for p in c.env]
    return (", ".join(env) or "true") + " |- " + \
        printPred(walk(c.body)) + " => " + printPred(walk(c.head))
