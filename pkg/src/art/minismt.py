"""A small SMT-LIB2 solver for QF_UFLIA, used as the default backend
subprocess (console script ``art-smt``).

Scope: integer ("value" sort) constants, Bool constants, uninterpreted
functions, linear integer arithmetic, equality.  Decides satisfiability of
the asserted conjunction by boolean case splitting down to literal sets,
then congruence closure (EUF) combined with Fourier-Motzkin elimination
with gcd tightening (LIA).  Equalities implied by the arithmetic are
propagated back into the congruence closure until a fixpoint.  FM with
tightening is not a complete integer decision procedure in general, but
it is exact on the difference-bound constraints this project emits; when
it errs it answers sat, which the client treats as "invalid" and is
therefore conservative.

Protocol: reads s-expressions from stdin, answers check-sat with
sat/unsat/unknown on stdout.  Supported commands: set-logic, set-option,
set-info, declare-const, declare-fun, assert, push, pop, reset, check-sat,
exit.
"""

from __future__ import annotations

import sys
from math import gcd


# ---------------------------------------------------------------------------
# S-expression reader
# ---------------------------------------------------------------------------

def tokenize(text):
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c
            i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            yield text[i + 1:j]
            i = j + 1
        elif c == '"':
            j = text.index('"', i + 1)
            yield text[i:j + 1]
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in " \t\r\n();":
                j += 1
            yield text[i:j]
            i = j


def parse_all(text):
    toks = list(tokenize(text))
    out, stack = [], []
    for t in toks:
        if t == "(":
            stack.append([])
        elif t == ")":
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                out.append(done)
        else:
            if stack:
                stack[-1].append(t)
            else:
                out.append(t)
    if stack:
        raise ValueError("unbalanced parentheses")
    return out


def sexp_key(s):
    if isinstance(s, list):
        return "(" + " ".join(sexp_key(x) for x in s) + ")"
    return s


# ---------------------------------------------------------------------------
# Literal forms
# ---------------------------------------------------------------------------

class Unsupported(Exception):
    pass


MAX_CONSTRAINTS = 4000


class Solver:
    def __init__(self):
        self.reset()

    def reset(self):
        self.sorts = {}        # name -> "Int" | "Bool"
        self.funs = {}         # name -> (arity, retsort)
        self.stack = [[]]      # assertion frames

    # -- command dispatch ---------------------------------------------------

    def command(self, s):
        if not isinstance(s, list) or not s:
            return None
        head = s[0]
        if head in ("set-logic", "set-option", "set-info", "echo"):
            return None
        if head == "declare-const":
            self.sorts[s[1]] = s[2]
            return None
        if head == "declare-fun":
            name, args, ret = s[1], s[2], s[3]
            if not args:
                self.sorts[name] = ret
            else:
                self.funs[name] = (len(args), ret)
            return None
        if head == "assert":
            self.stack[-1].append(s[1])
            return None
        if head == "push":
            n = int(s[1]) if len(s) > 1 else 1
            for _ in range(n):
                self.stack.append([])
            return None
        if head == "pop":
            n = int(s[1]) if len(s) > 1 else 1
            for _ in range(n):
                if len(self.stack) > 1:
                    self.stack.pop()
            return None
        if head == "reset":
            self.reset()
            return None
        if head == "check-sat":
            return self.check()
        if head == "exit":
            raise SystemExit(0)
        return None

    # -- satisfiability -----------------------------------------------------

    def check(self):
        fms = [f for frame in self.stack for f in frame]
        try:
            res = self.sat([(f, True) for f in fms], Lits())
            return "sat" if res else "unsat"
        except Unsupported:
            return "unknown"
        except RecursionError:
            return "unknown"

    def is_bool_term(self, s):
        if isinstance(s, str):
            if s in ("true", "false"):
                return True
            return self.sorts.get(s) == "Bool"
        if not s:
            return False
        if s[0] in ("and", "or", "not", "=>", "<=", "<", ">=", ">",
                    "distinct"):
            return True
        if s[0] == "ite":
            return self.is_bool_term(s[2])
        return s[0] == "=" and self.is_bool_term(s[1])

    def sat(self, todo, lits):
        """todo: list of (formula, polarity). lits: accumulated literal set."""
        while todo:
            f, pol = todo.pop()
            if isinstance(f, str):
                if f == "true":
                    if not pol:
                        return False
                    continue
                if f == "false":
                    if pol:
                        return False
                    continue
                lits = lits.with_bool(f, pol)
                if lits is None:
                    return False
                continue
            head = f[0]
            if head == "not":
                todo.append((f[1], not pol))
            elif head == "and" if pol else head == "or":
                for g in f[1:]:
                    todo.append((g, pol))
            elif head == "or" if pol else head == "and":
                for g in f[1:]:
                    if self.sat(todo + [(g, pol)], lits):
                        return True
                return False
            elif head == "=>":
                # (=> a b c) is a => (b => c)
                parts = f[1:]
                if pol:
                    for i, g in enumerate(parts):
                        p = (i == len(parts) - 1)
                        if self.sat(todo + [(g, p)], lits):
                            return True
                    return False
                else:
                    for i, g in enumerate(parts):
                        todo.append((g, i != len(parts) - 1))
            elif head == "ite":
                c, a, b = f[1], f[2], f[3]
                return (self.sat(todo + [(c, True), (a, pol)], lits)
                        or self.sat(todo + [(c, False), (b, pol)], lits))
            elif head == "distinct":
                pairs = [(f[i], f[j]) for i in range(1, len(f))
                         for j in range(i + 1, len(f))]
                if pol:
                    for a, b in pairs:
                        todo.append((["=", a, b], False))
                else:
                    for a, b in pairs:
                        if self.sat(todo + [(["=", a, b], True)], lits):
                            return True
                    return False
            elif head == "=" and self.is_bool_term(f[1]):
                a, b = f[1], f[2]
                if pol:
                    return (self.sat(todo + [(a, True), (b, True)], lits)
                            or self.sat(todo + [(a, False), (b, False)], lits))
                return (self.sat(todo + [(a, True), (b, False)], lits)
                        or self.sat(todo + [(a, False), (b, True)], lits))
            elif head in ("<=", "<", ">=", ">", "="):
                r = split_ite(f)
                if r is not None:
                    c, fa, fb = r
                    todo.append((["ite", c, fa, fb], pol))
                    continue
                lits = lits.with_atom(head, f[1], f[2], pol)
                if lits is None:
                    return False
            else:
                raise Unsupported(f"formula head {head}")
        return self.decide(lits)

    def decide(self, lits):
        # split remaining disequalities into < / > alternatives
        if lits.diseqs:
            (a, b), rest = lits.diseqs[0], lits.diseqs[1:]
            base = lits.but_diseqs(rest)
            lt = base.with_atom("<", a, b, True)
            if lt is not None and self.decide(lt):
                return True
            gt = base.with_atom("<", b, a, True)
            return gt is not None and self.decide(gt)
        return lits.feasible()


def split_ite(term):
    """Find the leftmost term-level ite inside term.  Returns
    (cond, term-with-then, term-with-else), or None if ite-free."""
    if not isinstance(term, list):
        return None
    if term[0] == "ite":
        return term[1], term[2], term[3]
    for i in range(1, len(term)):
        r = split_ite(term[i])
        if r is not None:
            c, a, b = r
            return c, term[:i] + [a] + term[i + 1:], \
                term[:i] + [b] + term[i + 1:]
    return None


class Lits:
    """A set of theory literals: bool literals, term equalities, and
    linear integer constraints (coeffs, const) meaning sum + const <= 0."""

    def __init__(self, bools=None, eqs=None, diseqs=None, cons=None):
        self.bools = bools or {}
        self.eqs = eqs or []
        self.diseqs = diseqs or []
        self.cons = cons or []

    def copy(self):
        return Lits(dict(self.bools), list(self.eqs), list(self.diseqs),
                    list(self.cons))

    def with_bool(self, name, pol):
        if self.bools.get(name, pol) != pol:
            return None
        out = self.copy()
        out.bools[name] = pol
        return out

    def but_diseqs(self, diseqs):
        out = self.copy()
        out.diseqs = list(diseqs)
        return out

    def with_atom(self, op, a, b, pol):
        out = self.copy()
        if op == "=":
            if pol:
                out.eqs.append((a, b))
            else:
                out.diseqs.append((a, b))
            return out
        if not pol:
            flip = {"<=": ">", "<": ">=", ">=": "<", ">": "<="}
            op = flip[op]
        if op == ">=":
            op, a, b = "<=", b, a
        elif op == ">":
            op, a, b = "<", b, a
        # a op b with op in {<=, <}: a - b (+1 if strict) <= 0
        coeffs, const = {}, 0
        for term, sign in ((a, 1), (b, -1)):
            c2, k2 = linearize(term)
            for v, c in c2.items():
                coeffs[v] = coeffs.get(v, 0) + sign * c
            const += sign * k2
        if op == "<":
            const += 1
        out.cons.append((coeffs, const))
        return out

    # -- theory check -------------------------------------------------------

    def feasible(self):
        eqpairs = list(self.eqs)
        uf = UnionFind()
        terms = []
        for a, b in eqpairs:
            terms += [a, b]
        for a, b in self.diseqs:
            terms += [a, b]
        for coeffs, _ in self.cons:
            terms += [v.term for v in coeffs if isinstance(v, AtomVar)]
        for t in terms:
            uf.add(t)
        for a, b in eqpairs:
            uf.merge(a, b)
        uf.close()
        while True:
            lincons = self._lincons(eqpairs, uf)
            if lincons is None:
                return False
            for a, b in self.diseqs:
                if uf.same(a, b):
                    return False
            if not fm_feasible(lincons):
                return False
            if not self._propagate(uf, lincons):
                return True

    def _lincons(self, eqpairs, uf):
        """Arithmetic view: the asserted constraints plus equalities, both
        asserted and congruence-derived.  None on a constant conflict."""
        lincons = [(dict(c), k) for c, k in self.cons]
        for a, b in eqpairs:
            c = {}
            k = 0
            for term, sign in ((a, 1), (b, -1)):
                c2, k2 = linearize(term)
                for v, cc in c2.items():
                    c[v] = c.get(v, 0) + sign * cc
                k += sign * k2
            lincons.append((c, k))
            lincons.append(({v: -cc for v, cc in c.items()}, -k))
        for cls in uf.classes():
            ints = set()
            reps = []
            for t in cls:
                if isinstance(t, str) and is_int_lit(t):
                    ints.add(int(t))
                else:
                    reps.append(t)
            if len(ints) > 1:
                return None
            if ints:
                ac, ak = {}, list(ints)[0]
            elif reps:
                ac, ak = linearize(reps[0])
                reps = reps[1:]
            for t in reps:
                c, k = linearize(t)
                diff = dict(c)
                for v, cc in ac.items():
                    diff[v] = diff.get(v, 0) - cc
                lincons.append((diff, k - ak))
                lincons.append(({v: -cc for v, cc in diff.items()}, ak - k))
        return lincons

    def _propagate(self, uf, lincons):
        """Merge same-head applications whose corresponding arguments the
        arithmetic forces equal; True if anything merged."""
        apps = {}
        for t in list(uf.term.values()):
            if isinstance(t, list) and t[0] not in ("+", "-", "*"):
                apps.setdefault((t[0], len(t)), []).append(t)
        merged = False
        for group in apps.values():
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    t1, t2 = group[i], group[j]
                    if uf.same(t1, t2):
                        continue
                    if all(uf.same(a, b) or implied_eq(lincons, a, b)
                           for a, b in zip(t1[1:], t2[1:])):
                        for a, b in zip(t1[1:], t2[1:]):
                            uf.merge(a, b)
                        uf.close()
                        merged = True
        return merged


class AtomVar:
    """A linear-arithmetic variable standing for an uninterpreted term."""
    __slots__ = ("key", "term")

    def __init__(self, key, term):
        self.key = key
        self.term = term

    def __eq__(self, other):
        return isinstance(other, AtomVar) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"AtomVar({self.key})"


def is_int_lit(s):
    return isinstance(s, str) and (s.lstrip("-").isdigit())


def linearize(term):
    """term -> (coeffs over AtomVar, const)."""
    if isinstance(term, str):
        if is_int_lit(term):
            return {}, int(term)
        return {AtomVar(term, term): 1}, 0
    head = term[0]
    if head == "+":
        coeffs, const = {}, 0
        for t in term[1:]:
            c2, k2 = linearize(t)
            for v, c in c2.items():
                coeffs[v] = coeffs.get(v, 0) + c
            const += k2
        return coeffs, const
    if head == "-":
        if len(term) == 2:
            c2, k2 = linearize(term[1])
            return {v: -c for v, c in c2.items()}, -k2
        coeffs, const = linearize(term[1])
        coeffs = dict(coeffs)
        for t in term[2:]:
            c2, k2 = linearize(t)
            for v, c in c2.items():
                coeffs[v] = coeffs.get(v, 0) - c
            const -= k2
        return coeffs, const
    if head == "*":
        parts = [linearize(t) for t in term[1:]]
        consts = [k for c, k in parts if not c]
        varparts = [(c, k) for c, k in parts if c]
        if len(varparts) > 1:
            raise Unsupported("nonlinear multiplication")
        scale = 1
        for k in consts:
            scale *= k
        if not varparts:
            return {}, scale
        c, k = varparts[0]
        return {v: cc * scale for v, cc in c.items()}, k * scale
    # uninterpreted application: a single atom variable
    return {AtomVar(sexp_key(term), term): 1}, 0


class UnionFind:
    def __init__(self):
        self.parent = {}
        self.kids = {}     # key -> list of terms
        self.uses = {}     # key -> list of app term keys using it
        self.term = {}     # key -> term

    def add(self, t):
        k = sexp_key(t)
        if k in self.parent:
            return k
        self.parent[k] = k
        self.term[k] = t
        if isinstance(t, list):
            for sub in t[1:]:
                sk = self.add(sub)
                self.uses.setdefault(self.find(sk), []).append(k)
        return k

    def find(self, k):
        while self.parent[k] != k:
            self.parent[k] = self.parent[self.parent[k]]
            k = self.parent[k]
        return k

    def same(self, a, b):
        ka, kb = self.add(a), self.add(b)
        self.close()
        return self.find(ka) == self.find(kb)

    def merge(self, a, b):
        ka, kb = self.add(a), self.add(b)
        self._union(ka, kb)

    def _union(self, ka, kb):
        ra, rb = self.find(ka), self.find(kb)
        if ra != rb:
            self.parent[ra] = rb
            self.uses.setdefault(rb, []).extend(self.uses.get(ra, []))

    def signature(self, k):
        t = self.term[k]
        if not isinstance(t, list):
            return None
        return (t[0],) + tuple(self.find(self.add(s)) for s in t[1:])

    def close(self):
        changed = True
        while changed:
            changed = False
            sigs = {}
            for k in list(self.parent):
                sig = self.signature(k)
                if sig is None:
                    continue
                if sig in sigs:
                    if self.find(sigs[sig]) != self.find(k):
                        self._union(sigs[sig], k)
                        changed = True
                else:
                    sigs[sig] = k

    def classes(self):
        out = {}
        for k in self.parent:
            out.setdefault(self.find(k), []).append(self.term[k])
        return out.values()


def implied_eq(lincons, a, b):
    """Do the constraints force term a equal to term b?  Checked by
    refuting both strict orderings."""
    ca, ka = linearize(a)
    cb, kb = linearize(b)
    diff = dict(ca)
    for v, c in cb.items():
        diff[v] = diff.get(v, 0) - c
    k = ka - kb
    lt = (dict(diff), k + 1)
    gt = ({v: -c for v, c in diff.items()}, -k + 1)
    return not fm_feasible(lincons + [lt]) and \
        not fm_feasible(lincons + [gt])


def normalize_con(coeffs, const):
    coeffs = {v: c for v, c in coeffs.items() if c != 0}
    if not coeffs:
        return coeffs, const
    g = 0
    for c in coeffs.values():
        g = gcd(g, abs(c))
    if g > 1:
        # sum/g is integral, so sum/g <= -const/g tightens to the ceiling
        coeffs = {v: c // g for v, c in coeffs.items()}
        const = -((-const) // g)
    return coeffs, const


def fm_feasible(cons):
    """Fourier-Motzkin with gcd tightening over integer variables.
    cons: list of (coeffs, const) meaning sum + const <= 0."""
    work = []
    for coeffs, const in cons:
        coeffs, const = normalize_con(coeffs, const)
        if not coeffs:
            if const > 0:
                return False
        else:
            work.append((coeffs, const))
    while work:
        if len(work) > MAX_CONSTRAINTS:
            raise Unsupported("constraint blowup")
        # choose the variable occurring fewest times
        counts = {}
        for coeffs, _ in work:
            for v in coeffs:
                counts[v] = counts.get(v, 0) + 1
        var = min(counts, key=lambda v: (counts[v], v.key))
        lower, upper, rest = [], [], []
        for coeffs, const in work:
            c = coeffs.get(var, 0)
            if c > 0:
                upper.append((coeffs, const))
            elif c < 0:
                lower.append((coeffs, const))
            else:
                rest.append((coeffs, const))
        new = rest
        for cu, ku in upper:
            a = cu[var]
            for cl, kl in lower:
                b = -cl[var]
                coeffs = {}
                for v, c in cu.items():
                    coeffs[v] = coeffs.get(v, 0) + b * c
                for v, c in cl.items():
                    coeffs[v] = coeffs.get(v, 0) + a * c
                const = b * ku + a * kl
                coeffs.pop(var, None)
                coeffs, const = normalize_con(coeffs, const)
                if not coeffs:
                    if const > 0:
                        return False
                else:
                    new.append((coeffs, const))
        # deduplicate
        seen = {}
        dedup = []
        for coeffs, const in new:
            key = tuple(sorted((v.key, c) for v, c in coeffs.items()))
            if key in seen:
                idx, best = seen[key]
                if const > best:
                    dedup[idx] = (coeffs, const)
                    seen[key] = (idx, const)
                continue
            seen[key] = (len(dedup), const)
            dedup.append((coeffs, const))
        work = dedup
    return True


# ---------------------------------------------------------------------------
# REPL
# ---------------------------------------------------------------------------

def main(argv=None):
    solver = Solver()
    buf = ""
    depth = 0
    out = sys.stdout
    for line in sys.stdin:
        buf += line
        depth = buf.count("(") - buf.count(")")
        if depth > 0:
            continue
        try:
            cmds = parse_all(buf)
        except (ValueError, IndexError):
            continue
        buf = ""
        for cmd in cmds:
            try:
                res = solver.command(cmd)
            except SystemExit:
                return 0
            except Unsupported:
                res = "unknown"
            except Exception as exc:  # robustness: report, keep session
                out.write(f'(error "{exc}")\n')
                out.flush()
                continue
            if res is not None:
                out.write(res + "\n")
                out.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
