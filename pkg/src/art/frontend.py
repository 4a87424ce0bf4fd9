"""Concrete syntax: lexer, parser, and printer for ``.limp`` programs and
``.quals`` qualifier files.

Grammar sketch (see README for the full version):

    program   := (typedef | measure | schema function)*
    typedef   := "type" NAME tyvars? "=" "exists!" exheap "." IDENT ":" rec
    exheap    := "emp" | lbind ("*" lbind)* ;  lbind := IDENT "=>" IDENT ":" ty
    measure   := "measure" NAME "(" IDENT ":" ty ")" "=" mexpr
    schema    := "(" params ")" "/" heap "=>" rtype "/" heap
    heap      := "emp" | hbind ("*" hbind)* ;  hbind := LOC "|->" IDENT ":" ty
    ty        := "int" | "bool" | "void" | TYVAR | "ref" "(" LOC ")"
               | "?ref" "(" LOC ")" | NAME "[" ty,* "]"
               | "{" fields "}" | "{" "v" ":" ty "|" pred "}"
    stmt      := "var" x "=" rhs ";" | x "." f "=" rhs ";" | f "(" args ")" ";"
               | "assert" "(" e ")" ";" | "if" "(" e ")" block ("else" block)?
               | "return" e? ";"
    annot     := "//:" ("fold"|"unfold"|"pad") "(" LOC ")" ";"?
               | "//:" "conc" "(" x ")" ";"?

Nested field reads, calls, and allocations in expressions are hoisted by
the parser to fresh ``var`` temporaries so every statement is in the kernel
form the typing rules expect.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (ANNOTS, BApp, BBool, BInt, BMaybeRef, BNullT, BRecord,
                   BRef, BTyVar, BaseType, EBin, EBool, EField, EInt, EIte,
                   EMeasure, ENot, ENull, ERecord, EVar, EWild, Expr, FunDecl,
                   Heap, Measure, NameGen, Program, Qualifier, RefType,
                   SAlloc, SAssign, SCall, SConc, SFold, SIf, SPad, SRead,
                   SReturn, SUnfold, SWrite, Schema, Stmt, TRUE, TypeDef,
                   locsOf, locsOfBase)


class ParseError(Exception):
    def __init__(self, msg, line=0, col=0):
        super().__init__(f"{line}:{col}: {msg}")
        self.msg = msg
        self.line = line
        self.col = col


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tok:
    kind: str   # IDENT INT LOC PUNCT ANNOT EOF
    text: str
    line: int
    col: int


PUNCTS = ["|->", "=>", "==", "!=", "<=", ">=", "&&", "||", "(", ")", "{",
          "}", "[", "]", ",", ";", ":", ".", "|", "?", "!", "=", "<", ">",
          "+", "-", "*", "~", "/"]


def lex(text: str):
    toks = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//:", i):
            toks.append(Tok("ANNOT", "//:", line, col))
            i += 3
            col += 3
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if c == "&":
            if text.startswith("&&", i):
                toks.append(Tok("PUNCT", "&&", line, col))
                i += 2
                col += 2
                continue
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            if j == i + 1:
                raise ParseError("stray '&'", line, col)
            toks.append(Tok("LOC", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Tok("INT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            if word == "exists" and text.startswith("!", j):
                toks.append(Tok("IDENT", "exists!", line, col))
                j += 1
            else:
                toks.append(Tok("IDENT", word, line, col))
            col += j - i
            i = j
            continue
        for p in PUNCTS:
            if text.startswith(p, i):
                toks.append(Tok("PUNCT", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", line, col)
    toks.append(Tok("EOF", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

ANNOT_KEYWORDS = ("fold", "unfold", "conc", "pad")


class Parser:
    def __init__(self, text: str):
        self.toks = lex(text)
        self.pos = 0
        self.gen = None  # per-function temp name generator

    # -- token helpers ------------------------------------------------------

    def peek(self, ahead=0) -> Tok:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.peek()
        self.pos += 1
        return t

    def at(self, text: str, ahead=0) -> bool:
        t = self.peek(ahead)
        return t.text == text and t.kind in ("PUNCT", "IDENT")

    def atKind(self, kind: str) -> bool:
        return self.peek().kind == kind

    def expect(self, text: str) -> Tok:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}",
                             t.line, t.col)
        return t

    def ident(self) -> str:
        t = self.next()
        if t.kind != "IDENT":
            raise ParseError(f"expected identifier, found {t.text!r}",
                             t.line, t.col)
        return t.text

    def loc(self, allowPlain=False) -> str:
        t = self.next()
        if t.kind == "LOC":
            return t.text
        if allowPlain and t.kind == "IDENT":
            return "&" + t.text
        raise ParseError(f"expected location, found {t.text!r}",
                         t.line, t.col)

    # -- types --------------------------------------------------------------

    def parseType(self, plainLocs=False) -> RefType:
        t = self.peek()
        if t.text == "int":
            self.next()
            return RefType(BInt())
        if t.text == "bool":
            self.next()
            return RefType(BBool())
        if t.text == "null":
            self.next()
            return RefType(BNullT())
        if t.text == "ref":
            self.next()
            self.expect("(")
            l = self.loc(plainLocs)
            self.expect(")")
            return RefType(BRef(l))
        if t.text == "?":
            self.next()
            self.expect("ref")
            self.expect("(")
            l = self.loc(plainLocs)
            self.expect(")")
            return RefType(BMaybeRef(l))
        if t.text == "{":
            return self.parseBraceType(plainLocs)
        if t.kind == "IDENT":
            name = self.ident()
            if self.at("["):
                self.next()
                args = [self.parseType(plainLocs)]
                while self.at(","):
                    self.next()
                    args.append(self.parseType(plainLocs))
                self.expect("]")
                return RefType(BApp(name, tuple(args)))
            if len(name) == 1 and name.isupper():
                return RefType(BTyVar(name))
            return RefType(BApp(name, ()))
        raise ParseError(f"expected type, found {t.text!r}", t.line, t.col)

    def parseBraceType(self, plainLocs: bool) -> RefType:
        save = self.pos
        self.expect("{")
        # refined form {v: T | p}
        if self.at("v") and self.at(":", 1):
            try:
                self.next()
                self.next()
                inner = self.parseType(plainLocs)
                if self.at("|"):
                    self.next()
                    p = self.parsePred()
                    self.expect("}")
                    return RefType(inner.base,
                                   _pconj(inner.refinement, p))
            except ParseError:
                pass
            self.pos = save
            self.expect("{")
        fields = []
        if not self.at("}"):
            while True:
                f = self.ident()
                self.expect(":")
                fields.append((f, self.parseType(plainLocs)))
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect("}")
        return RefType(BRecord(tuple(fields)))

    # -- predicates / expressions ------------------------------------------

    def parsePred(self) -> Expr:
        return self.parseOr()

    def parseOr(self) -> Expr:
        e = self.parseAnd()
        while self.at("||"):
            self.next()
            e = EBin("||", e, self.parseAnd())
        return e

    def parseAnd(self) -> Expr:
        e = self.parseCmp()
        while self.at("&&"):
            self.next()
            e = EBin("&&", e, self.parseCmp())
        return e

    def parseCmp(self) -> Expr:
        e = self.parseAdd()
        for op in ("==", "!=", "<=", "<", ">=", ">"):
            if self.at(op):
                self.next()
                return EBin(op, e, self.parseAdd())
        return e

    def parseAdd(self) -> Expr:
        e = self.parseAtom()
        while self.at("+") or self.at("-"):
            op = self.next().text
            e = EBin(op, e, self.parseAtom())
        return e

    def parseAtom(self) -> Expr:
        t = self.peek()
        if t.kind == "INT":
            self.next()
            return EInt(int(t.text))
        if t.text == "-" and self.peek(1).kind == "INT":
            self.next()
            return EInt(-int(self.next().text))
        if t.text == "(":
            self.next()
            e = self.parsePred()
            self.expect(")")
            return e
        if t.text == "!":
            self.next()
            return ENot(self.parseAtom())
        if t.text == "~":
            self.next()
            name = self.ident()
            self.expect(":")
            sort = self.ident()
            return EWild(name, sort)
        if t.text == "null":
            self.next()
            return ENull()
        if t.text == "true":
            self.next()
            return EBool(True)
        if t.text == "false":
            self.next()
            return EBool(False)
        if t.text == "if":
            self.next()
            self.expect("(")
            c = self.parsePred()
            self.expect(")")
            self.expect("then")
            a = self.parsePred()
            self.expect("else")
            b = self.parsePred()
            return EIte(c, a, b)
        if t.kind == "IDENT":
            name = self.ident()
            e: Expr
            if self.at("("):
                self.next()
                arg = self.parsePred()
                self.expect(")")
                e = EMeasure(name, arg)
            else:
                e = EVar(name)
            while self.at(".") and self.peek(1).kind == "IDENT":
                self.next()
                e = EField(e, self.ident())
            return e
        raise ParseError(f"expected expression, found {t.text!r}",
                         t.line, t.col)

    # -- heaps and schemas --------------------------------------------------

    def parseHeap(self, plainLocs=False, sep="|->") -> Heap:
        if self.at("emp"):
            self.next()
            return Heap()
        h = Heap()
        while True:
            l = self.loc(plainLocs)
            self.expect(sep)
            b = self.ident()
            self.expect(":")
            ty = self.parseType(plainLocs)
            h = h.bind(l, b, ty)
            if self.at("*"):
                self.next()
                continue
            break
        return h

    def parseSchema(self) -> Schema:
        self.expect("(")
        args = []
        if not self.at(")"):
            while True:
                x = self.ident()
                self.expect(":")
                args.append((x, self.parseType()))
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect(")")
        self.expect("/")
        inHeap = self.parseHeap()
        self.expect("=>")
        if self.at("void"):
            self.next()
            ret = RefType(BNullT())
        else:
            ret = self.parseType()
        self.expect("/")
        outHeap = self.parseHeap()
        # quantifiers are implicit: input locations and type variables are
        # collected from the signature, output-only locations existential
        inLocs = set(locsOf(inHeap))
        for _, t in args:
            inLocs |= locsOf(t)
        tyvars = set()

        def tvs(ty: RefType):
            b = ty.base
            if isinstance(b, BTyVar):
                tyvars.add(b.name)
            elif isinstance(b, BRecord):
                for _, ft in b.fields:
                    tvs(ft)
            elif isinstance(b, BApp):
                for at in b.args:
                    tvs(at)

        for _, t in args:
            tvs(t)
        for _, _, t in inHeap.bindings + outHeap.bindings:
            tvs(t)
        tvs(ret)
        outLocs = [l for l in locsOf(outHeap) | locsOf(ret)
                   if l not in inLocs]
        return Schema(tuple(sorted(inLocs)), tuple(sorted(tyvars)),
                      tuple(args), inHeap, tuple(sorted(outLocs)),
                      ret, outHeap)

    # -- statements ---------------------------------------------------------

    def hoist(self, e: Expr, out: list, span) -> Expr:
        """Hoist field reads, calls, and records out of expressions."""
        if isinstance(e, EField):
            base = self.hoist(e.value, out, span)
            if not isinstance(base, EVar):
                raise ParseError("chained field access unsupported",
                                 *span)
            tmp = self.gen.fresh("tmp")
            out.append(SRead(tmp, base.name, e.fname, span))
            return EVar(tmp)
        if isinstance(e, EMeasure):
            # identifier(args) at expression level is a function call
            tmp = self.gen.fresh("tmp")
            arg = self.hoist(e.arg, out, span)
            out.append(SCall(tmp, e.mname, (arg,), span))
            return EVar(tmp)
        if isinstance(e, _CallExpr):
            args = tuple(self.hoist(a, out, span) for a in e.args)
            tmp = self.gen.fresh("tmp")
            out.append(SCall(tmp, e.fname, args, span))
            return EVar(tmp)
        if isinstance(e, ERecord):
            fields = tuple((f, self.hoist(x, out, span)) for f, x in e.fields)
            tmp = self.gen.fresh("tmp")
            out.append(SAlloc(tmp, fields, span))
            return EVar(tmp)
        if isinstance(e, EBin):
            return EBin(e.op, self.hoist(e.lhs, out, span),
                        self.hoist(e.rhs, out, span))
        if isinstance(e, ENot):
            return ENot(self.hoist(e.arg, out, span))
        return e

    def parseRhs(self) -> Expr:
        """Right-hand side of var/write: record literal, call, or expr."""
        if self.at("{"):
            return self.parseRecordLit()
        save = self.pos
        t = self.peek()
        if t.kind == "IDENT" and self.at("(", 1) and \
                t.text not in ("if",):
            name = self.ident()
            self.next()
            args = []
            if not self.at(")"):
                while True:
                    args.append(self.parseExprHoistable())
                    if self.at(","):
                        self.next()
                        continue
                    break
            self.expect(")")
            if self.peek().text in _PREC or self.at("."):
                # call embedded in a larger expression; reparse it as one
                self.pos = save
                return self.parseExprHoistable()
            return _CallExpr(name, tuple(args))
        self.pos = save
        return self.parseExprHoistable()

    def parseRecordLit(self) -> ERecord:
        self.expect("{")
        fields = []
        if not self.at("}"):
            while True:
                f = self.ident()
                self.expect(":")
                fields.append((f, self.parseExprHoistable()))
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect("}")
        return ERecord(tuple(fields))

    def parseExprHoistable(self) -> Expr:
        """Program expression; field access parses as EField and calls as
        EMeasure and are hoisted later."""
        return self.parsePred()

    def parseBlock(self) -> tuple:
        self.expect("{")
        out = []
        while not self.at("}"):
            out.extend(self.parseStmt())
        self.expect("}")
        return tuple(out)

    def parseStmt(self) -> list:
        t = self.peek()
        span = (t.line, t.col)
        if t.kind == "ANNOT":
            return self.parseAnnots()
        if t.text == "var":
            self.next()
            x = self.ident()
            self.gen.note([x])
            self.expect("=")
            rhs = self.parseRhs()
            self.expect(";")
            pre: list = []
            if isinstance(rhs, ERecord):
                fields = tuple((f, self.hoist(e, pre, span))
                               for f, e in rhs.fields)
                return pre + [SAlloc(x, fields, span)]
            if isinstance(rhs, _CallExpr):
                args = tuple(self.hoist(a, pre, span) for a in rhs.args)
                return pre + [SCall(x, rhs.fname, args, span)]
            if isinstance(rhs, EField) and isinstance(rhs.value, EVar):
                return [SRead(x, rhs.value.name, rhs.fname, span)]
            if isinstance(rhs, EMeasure):
                args = (self.hoist(rhs.arg, pre, span),)
                return pre + [SCall(x, rhs.mname, args, span)]
            e = self.hoist(rhs, pre, span)
            return pre + [SAssign(x, e, span)]
        if t.text == "if":
            self.next()
            self.expect("(")
            cond = self.parseExprHoistable()
            self.expect(")")
            pre: list = []
            cond = self.hoist(cond, pre, span)
            then = self.parseBlock()
            els: tuple = ()
            if self.at("else"):
                self.next()
                els = self.parseBlock()
            return pre + [SIf(cond, then, els, span)]
        if t.text == "return":
            self.next()
            if self.at(";"):
                self.next()
                return [SReturn(None, span)]
            e = self.parseRhs()
            self.expect(";")
            pre: list = []
            e = self.hoist(e, pre, span)
            return pre + [SReturn(e, span)]
        if t.text == "assert":
            self.next()
            self.expect("(")
            e = self.parseExprHoistable()
            self.expect(")")
            self.expect(";")
            pre: list = []
            e = self.hoist(e, pre, span)
            return pre + [SCall(None, "assert", (e,), span)]
        if t.kind == "IDENT":
            # x.f = e;  or  f(args);
            if self.at(".", 1):
                x = self.ident()
                self.next()
                f = self.ident()
                self.expect("=")
                rhs = self.parseRhs()
                self.expect(";")
                pre: list = []
                if isinstance(rhs, ERecord):
                    # inline allocation stays inline (ownerless cell)
                    fields = tuple((fn, self.hoist(e, pre, span))
                                   for fn, e in rhs.fields)
                    return pre + [SWrite(x, f, ERecord(fields), span)]
                if isinstance(rhs, _CallExpr):
                    args = tuple(self.hoist(a, pre, span) for a in rhs.args)
                    tmp = self.gen.fresh("tmp")
                    pre.append(SCall(tmp, rhs.fname, args, span))
                    return pre + [SWrite(x, f, EVar(tmp), span)]
                e = self.hoist(rhs, pre, span)
                return pre + [SWrite(x, f, e, span)]
            if self.at("(", 1):
                name = self.ident()
                self.next()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parseExprHoistable())
                        if self.at(","):
                            self.next()
                            continue
                        break
                self.expect(")")
                self.expect(";")
                pre: list = []
                hargs = tuple(self.hoist(a, pre, span) for a in args)
                return pre + [SCall(None, name, hargs, span)]
        raise ParseError(f"expected statement, found {t.text!r}",
                         t.line, t.col)

    def parseAnnots(self) -> list:
        start = self.next()  # ANNOT token
        out = []
        line = start.line
        while True:
            t = self.peek()
            if t.kind != "IDENT" or t.text not in ANNOT_KEYWORDS or \
                    t.line != line:
                break
            kw = self.ident()
            span = (t.line, t.col)
            self.expect("(")
            if kw == "conc":
                x = self.ident()
                out.append(SConc(x, span))
            else:
                l = self.loc()
                out.append({"fold": SFold, "unfold": SUnfold,
                            "pad": SPad}[kw](l, span))
            self.expect(")")
            if self.at(";") and self.peek().line == line:
                self.next()
        if not out:
            t = self.peek()
            raise ParseError("empty annotation", t.line, t.col)
        return out

    # -- top level ----------------------------------------------------------

    def parseTypedef(self) -> TypeDef:
        self.expect("type")
        name = self.ident()
        tyvars = []
        if self.at("["):
            self.next()
            while True:
                tyvars.append(self.ident())
                if self.at(","):
                    self.next()
                    continue
                break
            self.expect("]")
        self.expect("=")
        self.expect("exists!")
        exHeap = self.parseHeap(plainLocs=True, sep="=>")
        self.expect(".")
        root = self.ident()
        self.expect(":")
        rec = self.parseType(plainLocs=True)
        if not isinstance(rec.base, BRecord):
            raise ParseError(f"typedef {name} root must be a record", 0, 0)
        return TypeDef(name, tuple(tyvars), exHeap, root, rec)

    def parseMeasure(self) -> tuple:
        self.expect("measure")
        name = self.ident()
        self.expect("(")
        param = self.ident()
        self.expect(":")
        owner = self.parseType(plainLocs=True)
        self.expect(")")
        self.expect("=")
        body = self.parsePred()
        if not isinstance(owner.base, BApp):
            raise ParseError(f"measure {name} parameter must name a "
                             "constructor", 0, 0)
        m = Measure(name, param, body)
        return m, owner.base.con

    def parseProgram(self) -> Program:
        typedefs = []
        measures = []   # (Measure, owner constructor)
        functions = []
        while not self.atKind("EOF"):
            if self.at("type"):
                typedefs.append(self.parseTypedef())
            elif self.at("measure"):
                measures.append(self.parseMeasure())
            elif self.at("("):
                schema = self.parseSchema()
                t = self.expect("function")
                name = self.ident()
                if any(f.name == name for f in functions):
                    raise ParseError(f"duplicate function {name}",
                                     t.line, t.col)
                self.expect("(")
                params = []
                if not self.at(")"):
                    while True:
                        params.append(self.ident())
                        if self.at(","):
                            self.next()
                            continue
                        break
                self.expect(")")
                if list(params) != [a for a, _ in schema.args]:
                    raise ParseError(
                        f"function {name} parameters do not match its "
                        "signature", t.line, t.col)
                self.gen = NameGen(params)
                self.gen.note(_identsIn(self.toks))
                body = self.parseBlock()
                functions.append(FunDecl(name, tuple(params), schema,
                                         body, (t.line, t.col)))
            elif self.at("function"):
                t = self.peek()
                raise ParseError("function without a signature",
                                 t.line, t.col)
            else:
                t = self.peek()
                raise ParseError(f"expected declaration, found {t.text!r}",
                                 t.line, t.col)
        # attach measures to their typedefs
        defs = []
        for d in typedefs:
            own = tuple(m for m, con in measures if con == d.name)
            defs.append(TypeDef(d.name, d.tyvars, d.exHeap, d.rootBinder,
                                d.rootRecord, own))
        names = [d.name for d in defs]
        if len(set(names)) != len(names):
            raise ParseError("duplicate type name", 0, 0)
        return Program(tuple(defs), tuple(m for m, _ in measures),
                       tuple(functions))


@dataclass(frozen=True)
class _CallExpr:
    """Parser-internal: a call in expression position, always hoisted."""
    fname: str
    args: tuple


def _identsIn(toks) -> set:
    return {t.text for t in toks if t.kind == "IDENT"}


def _pconj(a: Expr, b: Expr) -> Expr:
    if a == TRUE:
        return b
    if b == TRUE:
        return a
    return EBin("&&", a, b)


def parseProgram(text: str) -> Program:
    return Parser(text).parseProgram()


def parseQualifiers(text: str) -> list:
    p = Parser(text)
    out = []
    while not p.atKind("EOF"):
        p.expect("qualif")
        name = p.ident()
        p.expect("(")
        p.expect("v")
        p.expect(":")
        vsort = p.ident()
        p.expect(")")
        p.expect(":")
        body = p.parsePred()
        out.append(Qualifier(name, vsort, body))
    return out


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<=": 3, "<": 3, ">=": 3,
         ">": 3, "+": 4, "-": 4}


def printExpr(e: Expr, prec=0) -> str:
    if isinstance(e, EInt):
        return str(e.n)
    if isinstance(e, EBool):
        return "true" if e.b else "false"
    if isinstance(e, ENull):
        return "null"
    if isinstance(e, EVar):
        return e.name
    if isinstance(e, EWild):
        return f"~{e.name}:{e.sort}"
    if isinstance(e, ENot):
        return f"!{printExpr(e.arg, 5)}"
    if isinstance(e, EField):
        return f"{printExpr(e.value, 5)}.{e.fname}"
    if isinstance(e, EMeasure):
        return f"{e.mname}({printExpr(e.arg)})"
    if isinstance(e, EIte):
        return (f"if ({printExpr(e.cond)}) then {printExpr(e.then)} "
                f"else {printExpr(e.els)}")
    if isinstance(e, ERecord):
        inner = ", ".join(f"{f}: {printExpr(x)}" for f, x in e.fields)
        return "{" + inner + "}"
    if isinstance(e, EBin):
        p = _PREC[e.op]
        s = f"{printExpr(e.lhs, p)} {e.op} {printExpr(e.rhs, p + 1)}"
        return f"({s})" if p < prec else s
    raise TypeError(f"printExpr: {e!r}")


def printBase(b: BaseType, plainLocs=False) -> str:
    def pl(l):
        return l[1:] if plainLocs else l
    if isinstance(b, BInt):
        return "int"
    if isinstance(b, BBool):
        return "bool"
    if isinstance(b, BNullT):
        return "null"
    if isinstance(b, BTyVar):
        return b.name
    if isinstance(b, BRef):
        return f"ref({pl(b.loc)})"
    if isinstance(b, BMaybeRef):
        return f"?ref({pl(b.loc)})"
    if isinstance(b, BRecord):
        inner = ", ".join(f"{f}: {printType(t, plainLocs)}"
                          for f, t in b.fields)
        return "{" + inner + "}"
    if isinstance(b, BApp):
        if not b.args:
            return b.con
        inner = ", ".join(printType(t, plainLocs) for t in b.args)
        return f"{b.con}[{inner}]"
    raise TypeError(f"printBase: {b!r}")


def printType(t: RefType, plainLocs=False) -> str:
    if t.refinement == TRUE:
        return printBase(t.base, plainLocs)
    return ("{v: " + printBase(t.base, plainLocs) + " | "
            + printExpr(t.refinement) + "}")


def printHeap(h: Heap, plainLocs=False, sep="|->") -> str:
    if not h.bindings:
        return "emp"
    def pl(l):
        return l[1:] if plainLocs else l
    return " * ".join(f"{pl(l)} {sep} {b}: {printType(t, plainLocs)}"
                      for l, b, t in h.bindings)


def printSchema(s: Schema) -> str:
    args = ", ".join(f"{x}: {printType(t)}" for x, t in s.args)
    ret = "void" if isinstance(s.ret.base, BNullT) and s.ret.refinement == TRUE \
        else printType(s.ret)
    return (f"({args}) / {printHeap(s.inHeap)} => {ret} / "
            f"{printHeap(s.outHeap)}")


def printStmt(s: Stmt, ind: str) -> list:
    if isinstance(s, SAssign):
        return [f"{ind}var {s.x} = {printExpr(s.e)};"]
    if isinstance(s, SRead):
        return [f"{ind}var {s.y} = {s.x}.{s.fname};"]
    if isinstance(s, SWrite):
        return [f"{ind}{s.x}.{s.fname} = {printExpr(s.e)};"]
    if isinstance(s, SAlloc):
        inner = ", ".join(f"{f}: {printExpr(e)}" for f, e in s.fields)
        return [f"{ind}var {s.x} = {{{inner}}};"]
    if isinstance(s, SCall):
        args = ", ".join(printExpr(a) for a in s.args)
        if s.fname == "assert" and s.x is None:
            return [f"{ind}assert({args});"]
        if s.x is None:
            return [f"{ind}{s.fname}({args});"]
        return [f"{ind}var {s.x} = {s.fname}({args});"]
    if isinstance(s, SIf):
        out = [f"{ind}if ({printExpr(s.cond)}) {{"]
        for st in s.then:
            out += printStmt(st, ind + "  ")
        if s.els:
            out.append(f"{ind}}} else {{")
            for st in s.els:
                out += printStmt(st, ind + "  ")
        out.append(f"{ind}}}")
        return out
    if isinstance(s, SReturn):
        if s.e is None:
            return [f"{ind}return;"]
        return [f"{ind}return {printExpr(s.e)};"]
    if isinstance(s, SUnfold):
        return [f"{ind}//: unfold({s.loc})"]
    if isinstance(s, SFold):
        return [f"{ind}//: fold({s.loc})"]
    if isinstance(s, SPad):
        return [f"{ind}//: pad({s.loc})"]
    if isinstance(s, SConc):
        return [f"{ind}//: conc({s.x})"]
    raise TypeError(f"printStmt: {s!r}")


def printProgram(p: Program) -> str:
    chunks = []
    for d in p.typedefs:
        tv = f"[{', '.join(d.tyvars)}]" if d.tyvars else ""
        chunks.append(
            f"type {d.name}{tv} = exists! "
            f"{printHeap(d.exHeap, plainLocs=True, sep='=>')} . "
            f"{d.rootBinder}: {printType(d.rootRecord, plainLocs=True)}")
    ownerOf = {}
    for d in p.typedefs:
        for m in d.measures:
            ownerOf[m.name] = d
    for m in p.measures:
        d = ownerOf.get(m.name)
        own = d.name + (f"[{', '.join(d.tyvars)}]" if d and d.tyvars else "") \
            if d else "?"
        chunks.append(f"measure {m.name}({m.param}: {own}) = "
                      f"{printExpr(m.body)}")
    for f in p.functions:
        lines = [printSchema(f.schema),
                 f"function {f.name}({', '.join(f.params)}) {{"]
        for st in f.body:
            lines += printStmt(st, "  ")
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + ("\n" if chunks else "")
