"""Core syntactic objects: expressions, statements, types, heaps, schemas,
type definitions, measures, qualifiers, Horn clauses, substitution and
fresh-name machinery.

Everything here is an immutable value except NameGen.  Identifiers,
locations (spelled with a leading ``&``) and kappa ids (spelled ``k<n>``)
live in disjoint namespaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Union


# ---------------------------------------------------------------------------
# Expressions (shared between programs and refinement logic)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EInt:
    n: int


@dataclass(frozen=True)
class EBool:
    b: bool


@dataclass(frozen=True)
class ENull:
    pass


@dataclass(frozen=True)
class EVar:
    name: str


@dataclass(frozen=True)
class EBin:
    """Binary operation; op in {+, -, ==, !=, <=, <, >=, >, &&, ||}."""
    op: str
    lhs: "Expr"
    rhs: "Expr"


@dataclass(frozen=True)
class ENot:
    arg: "Expr"


@dataclass(frozen=True)
class EField:
    """Logical field projection Field(value, fieldname)."""
    value: "Expr"
    fname: str


@dataclass(frozen=True)
class EMeasure:
    """Measure application m(arg), uninterpreted in the logic."""
    mname: str
    arg: "Expr"


@dataclass(frozen=True)
class EIte:
    """if-then-else, used only inside measure bodies."""
    cond: "Expr"
    then: "Expr"
    els: "Expr"


@dataclass(frozen=True)
class ERecord:
    """Record literal {f1: e1, ...}; appears in alloc and field writes."""
    fields: tuple  # of (fname, Expr)


@dataclass(frozen=True)
class EWild:
    """Qualifier wildcard ~A with a sort; never appears in clauses."""
    name: str
    sort: str


@dataclass(frozen=True)
class KappaApp:
    """kappa-variable application with a pending substitution, kept
    unexpanded until solving.  pending maps names to expressions and is
    composed left-to-right."""
    kid: str
    pending: tuple = ()  # of (name, Expr)


Expr = Union[EInt, EBool, ENull, EVar, EBin, ENot, EField, EMeasure,
             EIte, ERecord, EWild, KappaApp]

TRUE = EBool(True)
FALSE = EBool(False)
NU = EVar("v")  # the distinguished value variable


def eq(a: Expr, b: Expr) -> Expr:
    return EBin("==", a, b)


def conj(preds: Iterable[Expr]) -> Expr:
    out: Optional[Expr] = None
    for p in preds:
        if p == TRUE:
            continue
        out = p if out is None else EBin("&&", out, p)
    return out if out is not None else TRUE


def conjuncts(p: Expr) -> list:
    if isinstance(p, EBin) and p.op == "&&":
        return conjuncts(p.lhs) + conjuncts(p.rhs)
    if p == TRUE:
        return []
    return [p]


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BInt:
    pass


@dataclass(frozen=True)
class BBool:
    pass


@dataclass(frozen=True)
class BTyVar:
    name: str


@dataclass(frozen=True)
class BNullT:
    """Type of the null literal."""
    pass


@dataclass(frozen=True)
class BRef:
    loc: str


@dataclass(frozen=True)
class BMaybeRef:
    loc: str


@dataclass(frozen=True)
class BRecord:
    fields: tuple  # of (fname, RefType)


@dataclass(frozen=True)
class BApp:
    con: str
    args: tuple  # of RefType


BaseType = Union[BInt, BBool, BTyVar, BNullT, BRef, BMaybeRef, BRecord, BApp]


@dataclass(frozen=True)
class RefType:
    base: BaseType
    refinement: Expr = TRUE

    def refined(self, p: Expr) -> "RefType":
        return RefType(self.base, conj([self.refinement, p]))


def tyInt(p: Expr = TRUE) -> RefType:
    return RefType(BInt(), p)


# ---------------------------------------------------------------------------
# Heaps and environments
# ---------------------------------------------------------------------------

class HeapError(Exception):
    pass


@dataclass(frozen=True)
class Heap:
    """Ordered finite map location -> (binder, RefType)."""
    bindings: tuple = ()  # of (loc, binder, RefType)

    def __post_init__(self):
        locs = [l for l, _, _ in self.bindings]
        binders = [b for _, b, _ in self.bindings]
        if len(set(locs)) != len(locs):
            raise HeapError("duplicate location in heap")
        if len(set(binders)) != len(binders):
            raise HeapError("duplicate binder in heap")

    def dom(self) -> list:
        return [l for l, _, _ in self.bindings]

    def has(self, loc: str) -> bool:
        return any(l == loc for l, _, _ in self.bindings)

    def lookup(self, loc: str):
        for l, b, t in self.bindings:
            if l == loc:
                return b, t
        raise HeapError(f"location {loc} not in heap")

    def bind(self, loc: str, binder: str, t: RefType) -> "Heap":
        return Heap(self.bindings + ((loc, binder, t),))

    def remove(self, loc: str) -> "Heap":
        return Heap(tuple(x for x in self.bindings if x[0] != loc))

    def update(self, loc: str, binder: str, t: RefType) -> "Heap":
        out = []
        found = False
        for l, b, ty in self.bindings:
            if l == loc:
                out.append((loc, binder, t))
                found = True
            else:
                out.append((l, b, ty))
        if not found:
            raise HeapError(f"location {loc} not in heap")
        return Heap(tuple(out))


@dataclass(frozen=True)
class TypeEnv:
    """Sequence of type bindings and guard predicates, in program order."""
    items: tuple = ()  # of ('bind', name, RefType) | ('guard', Expr)

    def bind(self, name: str, t: RefType) -> "TypeEnv":
        if self.lookupOpt(name) is not None:
            raise HeapError(f"identifier {name} bound twice")
        return TypeEnv(self.items + (("bind", name, t),))

    def guard(self, p: Expr) -> "TypeEnv":
        if p == TRUE:
            return self
        return TypeEnv(self.items + (("guard", p),))

    def lookupOpt(self, name: str) -> Optional[RefType]:
        for item in self.items:
            if item[0] == "bind" and item[1] == name:
                return item[2]
        return None

    def lookup(self, name: str) -> RefType:
        t = self.lookupOpt(name)
        if t is None:
            raise HeapError(f"unbound identifier {name}")
        return t

    def names(self) -> list:
        return [it[1] for it in self.items if it[0] == "bind"]


# ---------------------------------------------------------------------------
# Schemas, type definitions, measures, qualifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Schema:
    locs: tuple          # quantified input location symbols
    tyvars: tuple        # quantified type variable names
    args: tuple          # of (name, RefType)
    inHeap: Heap
    outLocs: tuple       # existential output locations
    ret: RefType
    outHeap: Heap


@dataclass(frozen=True)
class Measure:
    name: str
    param: str
    body: Expr           # uses param, field projections of it, recursion


@dataclass(frozen=True)
class TypeDef:
    name: str
    tyvars: tuple
    exHeap: Heap         # existential tail heap
    rootBinder: str
    rootRecord: RefType  # a BRecord-based RefType
    measures: tuple = ()


@dataclass(frozen=True)
class Qualifier:
    name: str
    vsort: str           # sort of the value variable
    body: Expr           # over NU and EWild placeholders


@dataclass(frozen=True)
class HornClause:
    env: tuple           # of Expr (may contain KappaApp)
    body: Expr
    head: Expr           # concrete Expr or KappaApp
    provenance: str = ""


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SAssign:
    x: str
    e: Expr
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SRead:
    y: str
    x: str
    fname: str
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SWrite:
    x: str
    fname: str
    e: Expr
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SAlloc:
    x: str
    fields: tuple        # of (fname, Expr)
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SCall:
    x: Optional[str]
    fname: str
    args: tuple
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SIf:
    cond: Expr
    then: tuple
    els: tuple
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SReturn:
    e: Optional[Expr]
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SUnfold:
    loc: str
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SFold:
    loc: str
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SConc:
    x: str
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class SPad:
    loc: str
    span: tuple = field(default=(0, 0), compare=False)


Stmt = Union[SAssign, SRead, SWrite, SAlloc, SCall, SIf, SReturn,
             SUnfold, SFold, SConc, SPad]

ANNOTS = (SUnfold, SFold, SConc, SPad)


@dataclass(frozen=True)
class FunDecl:
    name: str
    params: tuple
    schema: Schema
    body: tuple          # of Stmt
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Program:
    typedefs: tuple      # of TypeDef
    measures: tuple      # of Measure
    functions: tuple     # of FunDecl

    def typedef(self, name: str) -> TypeDef:
        for d in self.typedefs:
            if d.name == name:
                return d
        raise KeyError(name)

    def function(self, name: str) -> FunDecl:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(name)


# ---------------------------------------------------------------------------
# Substitution
# ---------------------------------------------------------------------------

def substExpr(theta: dict, e: Expr) -> Expr:
    """Apply a name -> Expr substitution.  KappaApp composes the pending
    substitution instead of expanding."""
    if isinstance(e, EVar):
        return theta.get(e.name, e)
    if isinstance(e, (EInt, EBool, ENull, EWild)):
        return e
    if isinstance(e, EBin):
        return EBin(e.op, substExpr(theta, e.lhs), substExpr(theta, e.rhs))
    if isinstance(e, ENot):
        return ENot(substExpr(theta, e.arg))
    if isinstance(e, EField):
        return EField(substExpr(theta, e.value), e.fname)
    if isinstance(e, EMeasure):
        return EMeasure(e.mname, substExpr(theta, e.arg))
    if isinstance(e, EIte):
        return EIte(substExpr(theta, e.cond), substExpr(theta, e.then),
                    substExpr(theta, e.els))
    if isinstance(e, ERecord):
        return ERecord(tuple((f, substExpr(theta, x)) for f, x in e.fields))
    if isinstance(e, KappaApp):
        extra = tuple((n, x) for n, x in theta.items())
        return KappaApp(e.kid, e.pending + extra)
    raise TypeError(f"substExpr: {e!r}")


def expandKappa(app: KappaApp, body: Expr) -> Expr:
    """Expand a kappa application by applying its pending substitution,
    left to right, to the given body."""
    out = body
    for n, x in app.pending:
        out = substExpr({n: x}, out)
    return out


def substBase(theta: dict, b: BaseType) -> BaseType:
    if isinstance(b, BRecord):
        return BRecord(tuple((f, substType(theta, t)) for f, t in b.fields))
    if isinstance(b, BApp):
        return BApp(b.con, tuple(substType(theta, t) for t in b.args))
    return b


def substType(theta: dict, t: RefType) -> RefType:
    return RefType(substBase(theta, t.base), substExpr(theta, t.refinement))


def substHeap(theta: dict, h: Heap) -> Heap:
    return Heap(tuple((l, b, substType(theta, t)) for l, b, t in h.bindings))


def substLocBase(lmap: dict, b: BaseType) -> BaseType:
    if isinstance(b, BRef):
        return BRef(lmap.get(b.loc, b.loc))
    if isinstance(b, BMaybeRef):
        return BMaybeRef(lmap.get(b.loc, b.loc))
    if isinstance(b, BRecord):
        return BRecord(tuple((f, substLocType(lmap, t)) for f, t in b.fields))
    if isinstance(b, BApp):
        return BApp(b.con, tuple(substLocType(lmap, t) for t in b.args))
    return b


def substLocType(lmap: dict, t: RefType) -> RefType:
    return RefType(substLocBase(lmap, t.base), t.refinement)


def substLocHeap(lmap: dict, h: Heap) -> Heap:
    return Heap(tuple((lmap.get(l, l), b, substLocType(lmap, t))
                      for l, b, t in h.bindings))


def substTyVarBase(tmap: dict, b: BaseType):
    """Replace type variables by RefTypes; returns a BaseType or, when the
    whole base is a mapped variable, the replacement RefType."""
    if isinstance(b, BTyVar) and b.name in tmap:
        return tmap[b.name]
    if isinstance(b, BRecord):
        return BRecord(tuple((f, substTyVarType(tmap, t)) for f, t in b.fields))
    if isinstance(b, BApp):
        return BApp(b.con, tuple(substTyVarType(tmap, t) for t in b.args))
    return b


def substTyVarType(tmap: dict, t: RefType) -> RefType:
    got = substTyVarBase(tmap, t.base)
    if isinstance(got, RefType):
        return RefType(got.base, conj([got.refinement, t.refinement]))
    return RefType(got, t.refinement)


def substTyVarHeap(tmap: dict, h: Heap) -> Heap:
    return Heap(tuple((l, b, substTyVarType(tmap, t)) for l, b, t in h.bindings))


# ---------------------------------------------------------------------------
# Fresh names and location sets
# ---------------------------------------------------------------------------

class NameGen:
    """Deterministic fresh-name source for one pipeline instance."""

    def __init__(self, taken: Iterable[str] = ()):
        self.taken = set(taken)

    def note(self, names: Iterable[str]):
        self.taken.update(names)

    def fresh(self, hint: str, kind: str = "binder") -> str:
        if kind == "location" and not hint.startswith("&"):
            hint = "&" + hint
        if kind == "kappa" and not hint.startswith("k"):
            hint = "k" + hint
        base = hint.rstrip("0123456789") or hint
        if hint not in self.taken:
            self.taken.add(hint)
            return hint
        i = 1
        while f"{base}{i}" in self.taken:
            i += 1
        name = f"{base}{i}"
        self.taken.add(name)
        return name


def locsOfBase(b: BaseType) -> set:
    if isinstance(b, (BRef, BMaybeRef)):
        return {b.loc}
    if isinstance(b, BRecord):
        out = set()
        for _, t in b.fields:
            out |= locsOfBase(t.base)
        return out
    if isinstance(b, BApp):
        out = set()
        for t in b.args:
            out |= locsOfBase(t.base)
        return out
    return set()


def locsOf(t) -> set:
    if isinstance(t, RefType):
        return locsOfBase(t.base)
    if isinstance(t, Heap):
        out = set(t.dom())
        for _, _, ty in t.bindings:
            out |= locsOfBase(ty.base)
        return out
    raise TypeError(f"locsOf: {t!r}")


def freeVars(e: Expr) -> set:
    if isinstance(e, EVar):
        return {e.name}
    if isinstance(e, (EInt, EBool, ENull, EWild)):
        return set()
    if isinstance(e, EBin):
        return freeVars(e.lhs) | freeVars(e.rhs)
    if isinstance(e, ENot):
        return freeVars(e.arg)
    if isinstance(e, EField):
        return freeVars(e.value)
    if isinstance(e, EMeasure):
        return freeVars(e.arg)
    if isinstance(e, EIte):
        return freeVars(e.cond) | freeVars(e.then) | freeVars(e.els)
    if isinstance(e, ERecord):
        out = set()
        for _, x in e.fields:
            out |= freeVars(x)
        return out
    if isinstance(e, KappaApp):
        out = set()
        for _, x in e.pending:
            out |= freeVars(x)
        return out
    raise TypeError(f"freeVars: {e!r}")
