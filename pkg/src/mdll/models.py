"""Finite algebraic models: lattices, linear algebras with storage, their
kernels, heterogeneous algebras, position-sensitive evaluation of sequents,
and brute-force rule soundness checking.

Algebras are given by explicit operation tables over small carriers (soft
cap 8 elements for exhaustive rule checks).  Residuals are always
recomputed from the order by brute force, never trusted from input files,
and every structural connective is interpreted through them according to
its position.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from . import sexpr
from .terms import PRECEDENT, SUCCEDENT, Formula, Structure

NO_RESIDUAL = object()


class ModelError(ValueError):
    pass


@dataclass
class FiniteLattice:
    elems: tuple
    leq_pairs: frozenset  # reflexive-transitive order as (a, b) pairs

    def __post_init__(self):
        self._leq = {(a, b): (a, b) in self.leq_pairs for a in self.elems for b in self.elems}

    def leq(self, a, b):
        return self._leq[(a, b)]

    def validate(self):
        es = self.elems
        for a in es:
            if not self.leq(a, a):
                raise ModelError(f"order not reflexive at {a}")
        for a, b in itertools.product(es, es):
            if self.leq(a, b) and self.leq(b, a) and a != b:
                raise ModelError(f"order not antisymmetric at {a},{b}")
        for a, b, c in itertools.product(es, es, es):
            if self.leq(a, b) and self.leq(b, c) and not self.leq(a, c):
                raise ModelError(f"order not transitive at {a},{b},{c}")
        for a, b in itertools.product(es, es):
            if self.meet(a, b) is None or self.join(a, b) is None:
                raise ModelError(f"missing meet/join of {a},{b}")
        if self.top() is None or self.bottom() is None:
            raise ModelError("missing top or bottom")

    def meet(self, a, b):
        lower = [c for c in self.elems if self.leq(c, a) and self.leq(c, b)]
        best = [c for c in lower if all(self.leq(d, c) for d in lower)]
        return best[0] if best else None

    def join(self, a, b):
        upper = [c for c in self.elems if self.leq(a, c) and self.leq(b, c)]
        best = [c for c in upper if all(self.leq(c, d) for d in upper)]
        return best[0] if best else None

    def top(self):
        for c in self.elems:
            if all(self.leq(d, c) for d in self.elems):
                return c
        return None

    def bottom(self):
        for c in self.elems:
            if all(self.leq(c, d) for d in self.elems):
                return c
        return None

    def distributive(self):
        for a, b, c in itertools.product(self.elems, repeat=3):
            if self.meet(a, self.join(b, c)) != self.join(self.meet(a, b), self.meet(a, c)):
                return False
        return True


def residual(lat, op, coord, fixed, target):
    """max{x : op(...) <= target} with `fixed` in the other coordinate.

    coord is the argument position being residuated; returns NO_RESIDUAL when
    the candidate set has no maximum (op not join-preserving there)."""
    cands = []
    for x in lat.elems:
        v = op(fixed, x) if coord == 1 else op(x, fixed)
        if lat.leq(v, target):
            cands.append(x)
    best = [x for x in cands if all(lat.leq(y, x) for y in cands)]
    return best[0] if best else NO_RESIDUAL


def coresidual(lat, op, coord, fixed, target):
    """min{x : target <= op(...)}; dual of `residual`."""
    cands = []
    for x in lat.elems:
        v = op(fixed, x) if coord == 1 else op(x, fixed)
        if lat.leq(target, v):
            cands.append(x)
    best = [x for x in cands if all(lat.leq(x, y) for y in cands)]
    return best[0] if best else NO_RESIDUAL


@dataclass
class FiniteILAlgebra:
    """Linear algebra with optional storage/co-storage tables.

    The lattice part must be distributive for the additive structural
    connectives to be interpretable; multiplicatives are a commutative
    monoid with a residuated tensor and a meet-preserving par."""

    name: str
    lattice: FiniteLattice
    tensor: dict  # (a,b) -> c
    par: dict
    one: str
    bot: str
    bang: dict | None = None  # a -> !a
    quest: dict | None = None

    @property
    def elems(self):
        return self.lattice.elems

    def leq(self, a, b):
        return self.lattice.leq(a, b)

    def t(self, a, b):
        return self.tensor[(a, b)]

    def p(self, a, b):
        return self.par[(a, b)]

    def limp(self, a, c):
        return residual(self.lattice, self.t, 1, a, c)

    def subt(self, a, b):
        """a coimp b = min{c : b <= a par c}; exists in BiL-algebras."""
        return coresidual(self.lattice, self.p, 1, a, b)

    def lneg(self, a):
        zero = self.lattice.bottom()
        return self.limp(a, zero)

    def validate(self, variant="ilsc"):
        """Itemised validation; returns a list of (check, ok, detail)."""
        out = []
        lat = self.lattice
        try:
            lat.validate()
            out.append(("lattice", True, ""))
        except ModelError as e:
            out.append(("lattice", False, str(e)))
            return out
        out.append(("distributive", lat.distributive(), ""))
        es = self.elems
        ok = all(self.t(a, b) == self.t(b, a) for a, b in itertools.product(es, es))
        ok = ok and all(self.t(a, self.one) == a for a in es)
        ok = ok and all(
            self.t(self.t(a, b), c) == self.t(a, self.t(b, c))
            for a, b, c in itertools.product(es, es, es)
        )
        out.append(("tensor commutative monoid", ok, ""))
        ok = all(self.p(a, b) == self.p(b, a) for a, b in itertools.product(es, es))
        ok = ok and all(self.p(a, self.bot) == a for a in es)
        ok = ok and all(
            self.p(self.p(a, b), c) == self.p(a, self.p(b, c))
            for a, b, c in itertools.product(es, es, es)
        )
        out.append(("par commutative monoid", ok, ""))
        ok = True
        for a, b, c in itertools.product(es, es, es):
            lhs = self.leq(self.t(a, b), c)
            r = self.limp(a, c)
            rhs = r is not NO_RESIDUAL and self.leq(b, r)
            if lhs != rhs:
                ok = False
                break
        out.append(("tensor residuated", ok, ""))
        ok = all(
            self.p(a, lat.meet(b, c)) == lat.meet(self.p(a, b), self.p(a, c))
            for a, b, c in itertools.product(es, es, es)
        ) and all(self.p(a, lat.top()) == lat.top() for a in es)
        out.append(("par preserves finite meets", ok, ""))
        if variant.startswith("cl") or variant == "classical":
            ok = all(self.lneg(self.lneg(a)) == a for a in es)
            out.append(("double negation", ok, ""))
        if self.bang is not None:
            out.extend(self._validate_storage())
        if self.quest is not None:
            out.extend(self._validate_costorage())
        if variant in ("ilp", "blp") and self.bang is not None and self.quest is not None:
            ok = True
            for a, b in itertools.product(es, es):
                lhs = self.bang[self.limp(a, b)]
                rhs = self.limp(self.quest[a], self.quest[b])
                if rhs is NO_RESIDUAL or not self.leq(lhs, rhs):
                    ok = False
                    break
            out.append(("pairing", ok, ""))
        return out

    def _validate_storage(self):
        out = []
        es = self.elems
        b = self.bang
        ok = all(self.leq(b[x], b[y]) for x in es for y in es if self.leq(x, y))
        out.append(("bang monotone", ok, ""))
        ok = all(self.leq(b[x], x) and self.leq(b[x], b[b[x]]) for x in es)
        out.append(("bang interior", ok, ""))
        ok = all(
            self.t(b[x], b[y]) == b[self.lattice.meet(x, y)]
            for x in es
            for y in es
        ) and b[self.lattice.top()] == self.one
        out.append(("bang multiplicativity", ok, ""))
        return out

    def _validate_costorage(self):
        out = []
        es = self.elems
        q = self.quest
        ok = all(self.leq(q[x], q[y]) for x in es for y in es if self.leq(x, y))
        out.append(("quest monotone", ok, ""))
        ok = all(self.leq(x, q[x]) and self.leq(q[q[x]], q[x]) for x in es)
        out.append(("quest closure", ok, ""))
        ok = all(
            self.p(q[x], q[y]) == q[self.lattice.join(x, y)]
            for x in es
            for y in es
        ) and q[self.lattice.bottom()] == self.bot
        out.append(("quest multiplicativity", ok, ""))
        return out

    def is_valid(self, variant="ilsc"):
        return all(ok for _, ok, _ in self.validate(variant))


def _sub_lattice(parent, elems):
    return FiniteLattice(
        tuple(elems), frozenset((a, b) for a in elems for b in elems if parent.leq(a, b))
    )


@dataclass
class KernelAlgebra:
    """Kernel of a storage/co-storage operator, as a finite algebra with the
    induced lattice and residuation structure."""

    lattice: FiniteLattice

    @property
    def elems(self):
        return self.lattice.elems

    def leq(self, a, b):
        return self.lattice.leq(a, b)

    def meet(self, a, b):
        return self.lattice.meet(a, b)

    def join(self, a, b):
        return self.lattice.join(a, b)

    def imp(self, a, b):
        return residual(self.lattice, self.lattice.meet, 1, a, b)

    def coimp(self, a, b):
        return coresidual(self.lattice, self.lattice.join, 1, a, b)

    def top(self):
        return self.lattice.top()

    def bottom(self):
        return self.lattice.bottom()

    def is_heyting(self):
        return all(
            self.imp(a, b) is not NO_RESIDUAL
            for a, b in itertools.product(self.elems, self.elems)
        )

    def heyting_law_holds(self):
        for a, b, c in itertools.product(self.elems, repeat=3):
            i = self.imp(a, c)
            if i is NO_RESIDUAL:
                return False
            if self.leq(self.meet(a, b), c) != self.leq(b, i):
                return False
        return True


def kernel_of(alg):
    """Split a storage (and co-storage) algebra into its heterogeneous
    presentation: kernels as separate carriers with the retraction maps."""
    if alg.bang is None:
        raise ModelError("kernel_of needs a storage table")
    for check, ok, detail in alg._validate_storage():
        if not ok:
            raise ModelError(f"storage axiom violated: {check} {detail}")
    a_elems = sorted({alg.bang[x] for x in alg.elems}, key=alg.elems.index)
    A = KernelAlgebra(_sub_lattice(alg.lattice, a_elems))
    eb = {x: x for x in a_elems}
    io = {x: alg.bang[x] for x in alg.elems}
    B = None
    eq = ga = None
    if alg.quest is not None:
        for check, ok, detail in alg._validate_costorage():
            if not ok:
                raise ModelError(f"co-storage axiom violated: {check} {detail}")
        b_elems = sorted({alg.quest[x] for x in alg.elems}, key=alg.elems.index)
        B = KernelAlgebra(_sub_lattice(alg.lattice, b_elems))
        eq = {x: x for x in b_elems}
        ga = {x: alg.quest[x] for x in alg.elems}
    stripped = FiniteILAlgebra(
        name=alg.name + "*",
        lattice=alg.lattice,
        tensor=alg.tensor,
        par=alg.par,
        one=alg.one,
        bot=alg.bot,
    )
    het = FiniteHetAlgebra(
        name=alg.name + "*", L=stripped, A=A, B=B, eb=eb, io=io, eq=eq, ga=ga
    )
    het.derive_paired_maps()
    return het


@dataclass
class FiniteHetAlgebra:
    """Heterogeneous algebra: a linear algebra L, a Heyting algebra A with
    an adjunction eb -| io into L, and (optionally) a distributive lattice B
    with ga -| eq, plus the paired maps when they exist."""

    name: str
    L: FiniteILAlgebra
    A: KernelAlgebra
    B: KernelAlgebra | None
    eb: dict  # A -> L
    io: dict  # L -> A
    eq: dict | None = None  # B -> L
    ga: dict | None = None  # L -> B
    rtri: dict | None = None  # (A, B) -> B
    brtri: dict | None = None  # (B, A) -> A

    def derive_paired_maps(self):
        """Compute the heterogeneous arrows from L when they exist: rtri via
        e_! a -o e_? x being closed, brtri dually via the co-implication."""
        if self.B is None:
            return
        rtri = {}
        for a in self.A.elems:
            for x in self.B.elems:
                v = self.L.limp(self.eb[a], self.eq[x])
                if v is NO_RESIDUAL or self.eq[self.ga[v]] != v:
                    rtri = None
                    break
                rtri[(a, x)] = self.ga[v]
            if rtri is None:
                break
        self.rtri = rtri
        brtri = {}
        for x in self.B.elems:
            for a in self.A.elems:
                v = self.L.subt(self.eq[x], self.eb[a])
                if v is NO_RESIDUAL or self.eb[self.io[v]] != v:
                    brtri = None
                    break
                brtri[(x, a)] = self.io[v]
            if brtri is None:
                break
        self.brtri = brtri

    def validate(self, variant="ilsc"):
        """Itemised pass/fail report for the heterogeneous axioms."""
        out = []
        L, A, B = self.L, self.A, self.B
        out.extend(("L: " + c, ok, d) for c, ok, d in L.validate(variant))
        out.append(("A is a Heyting algebra", A.heyting_law_holds(), ""))
        ok = all(
            L.leq(self.eb[a], x) == A.leq(a, self.io[x])
            for a in A.elems
            for x in L.elems
        )
        out.append(("eb -| io", ok, ""))
        ok = all(self.io[self.eb[a]] == a for a in A.elems)
        out.append(("io o eb = id", ok, ""))
        ok = all(
            L.t(self.eb[a], self.eb[b]) == self.eb[A.meet(a, b)]
            for a in A.elems
            for b in A.elems
        )
        out.append(("eb(a) tensor eb(b) = eb(a meet b)", ok, ""))
        out.append(("eb(t) = 1", self.eb[A.top()] == L.one, ""))
        if B is not None:
            out.append(("B is distributive", B.lattice.distributive(), ""))
            if variant in ("blsc", "blp"):
                ok = all(
                    B.coimp(x, y) is not NO_RESIDUAL
                    for x in B.elems
                    for y in B.elems
                )
                out.append(("B is co-Heyting", ok, ""))
            ok = all(
                B.leq(self.ga[x], b) == L.leq(x, self.eq[b])
                for b in B.elems
                for x in L.elems
            )
            out.append(("ga -| eq", ok, ""))
            ok = all(self.ga[self.eq[b]] == b for b in B.elems)
            out.append(("ga o eq = id", ok, ""))
            ok = all(
                L.p(self.eq[x], self.eq[y]) == self.eq[B.join(x, y)]
                for x in B.elems
                for y in B.elems
            )
            out.append(("eq(x) par eq(y) = eq(x join y)", ok, ""))
            out.append(("eq(f) = bot", self.eq[B.bottom()] == L.bot, ""))
        if variant in ("ilp", "blp"):
            if self.rtri is None:
                out.append(("rtri defined", False, "e_! a -o e_? x is not closed"))
            else:
                ok = all(
                    L.limp(self.eb[a], self.eq[x]) == self.eq[self.rtri[(a, x)]]
                    for a in self.A.elems
                    for x in self.B.elems
                )
                out.append(("eb(a) -o eq(x) = eq(a rtri x)", ok, ""))
                ok = True
                for p, q in itertools.product(L.elems, L.elems):
                    r = L.limp(p, q)
                    if r is NO_RESIDUAL:
                        ok = False
                        break
                    if not B.leq(self.ga[p], self.rtri[(self.io[r], self.ga[q])]):
                        ok = False
                        break
                out.append(("ga(p) <= io(p -o q) rtri ga(q)", ok, ""))
        return out

    def is_valid(self, variant="ilsc"):
        return all(ok for _, ok, _ in self.validate(variant))

    def carrier(self, type_tag):
        if type_tag == "Linear":
            return self.L.elems
        if type_tag == "BangKernel":
            return self.A.elems
        if type_tag == "QuestKernel":
            if self.B is None:
                raise ModelError("model has no quest kernel")
            return self.B.elems
        raise ModelError(f"unknown type {type_tag}")


# ---------------------------------------------------------------------------
# position-sensitive evaluation


class ResidualMissing(ModelError):
    pass


class NoInterpretation(ModelError):
    pass


@dataclass(frozen=True)
class Assignment:
    """Typed assignment of algebra elements to metavariables and atoms."""

    values: tuple  # sorted ((name, (elem, type)), ...)

    def get(self, name):
        for n, v in self.values:
            if n == name:
                return v
        raise KeyError(name)


def _kernel(h, tag):
    return h.A if tag == "BangKernel" else h.B


def _need(value, what):
    if value is NO_RESIDUAL or value is None:
        raise ResidualMissing(f"missing residual for {what}")
    return value


def eval_formula(f, assign, h, calc):
    """Value of an operational term; returns (element, type)."""
    if f.is_atom() or f.is_mvar():
        return assign.get(f.name)
    args = [eval_formula(a, assign, h, calc) for a in f.args]
    head = f.head
    L = h.L
    if head == "one":
        return L.one, "Linear"
    if head == "bot":
        return L.bot, "Linear"
    if head == "top":
        return L.lattice.top(), "Linear"
    if head == "zero":
        return L.lattice.bottom(), "Linear"
    if head in ("tensor", "par", "with", "plus", "limp", "coimp", "lneg", "rneg"):
        vals = [v for v, _ in args]
        if head == "tensor":
            return L.t(*vals), "Linear"
        if head == "par":
            return L.p(*vals), "Linear"
        if head == "with":
            return L.lattice.meet(*vals), "Linear"
        if head == "plus":
            return L.lattice.join(*vals), "Linear"
        if head == "limp":
            return _need(L.limp(*vals), "limp"), "Linear"
        if head == "coimp":
            return _need(L.subt(*vals), "coimp"), "Linear"
        if head == "lneg":
            return _need(L.limp(vals[0], L.bot), "lneg"), "Linear"
        return _need(L.subt(vals[0], L.one), "rneg"), "Linear"
    if head == "dia":
        return h.eb[args[0][0]], "Linear"
    if head == "box":
        if h.eq is None:
            raise NoInterpretation("model has no quest kernel")
        return h.eq[args[0][0]], "Linear"
    if head == "bsq":
        return h.io[args[0][0]], "BangKernel"
    if head == "bdia":
        if h.ga is None:
            raise NoInterpretation("model has no quest kernel")
        return h.ga[args[0][0]], "QuestKernel"
    raise NoInterpretation(f"no interpretation for operational head {head!r}")


def _rtri_table(h):
    if h.rtri is None:
        raise NoInterpretation("model has no paired map (rtri)")
    return h.rtri


def _brtri_table(h):
    if h.brtri is None:
        raise NoInterpretation("model has no paired map (brtri)")
    return h.brtri


def _triu(h, g, p):
    """min{s : p <= g rtri s} (left adjoint of rtri in its 2nd coordinate)."""
    rt = _rtri_table(h)
    cands = [s for s in h.B.elems if h.B.leq(p, rt[(g, s)])]
    best = [s for s in cands if all(h.B.leq(s, t) for t in cands)]
    return _need(best[0] if best else NO_RESIDUAL, "triu")


def _tril(h, s, p):
    """max{g : p <= g rtri s}."""
    rt = _rtri_table(h)
    cands = [g for g in h.A.elems if h.B.leq(p, rt[(g, s)])]
    best = [g for g in cands if all(h.A.leq(x, g) for x in cands)]
    return _need(best[0] if best else NO_RESIDUAL, "tril")


def _trid(h, p, d):
    """max{g : p brtri g <= d} (residual of brtri in its 2nd coordinate)."""
    bt = _brtri_table(h)
    cands = [g for g in h.A.elems if h.A.leq(bt[(p, g)], d)]
    best = [g for g in cands if all(h.A.leq(x, g) for x in cands)]
    return _need(best[0] if best else NO_RESIDUAL, "trid")


def _btril(h, g, d):
    """min{p : g <= trid(p, d)}."""
    bt = _brtri_table(h)
    cands = [p for p in h.B.elems if h.A.leq(g, _trid(h, p, d))]
    best = [p for p in cands if all(h.B.leq(p, q) for q in cands)]
    return _need(best[0] if best else NO_RESIDUAL, "btril")


def eval_structure(s, position, expected, assign, h, calc):
    """Position-sensitive value of a structural term of type `expected`;
    returns (elem, type).

    Structural connectives take the interpretation of the corresponding
    logical connective for their position; connectives with no counterpart
    in that position raise NoInterpretation."""
    if s.is_mvar():
        return assign.get(s.name)
    if s.is_leaf():
        return eval_formula(s.formula, assign, h, calc)
    head = s.head
    pre = position == PRECEDENT
    L = h.L
    flipped = SUCCEDENT if pre else PRECEDENT

    def child(i, want, flip=False):
        return eval_structure(
            s.args[i], flipped if flip else position, want, assign, h, calc
        )

    if head == "sPhi":
        return (L.one if pre else L.bot), "Linear"
    if head == "sI":
        return (L.lattice.top() if pre else L.lattice.bottom()), "Linear"
    if head == "sComma":
        (x, _), (y, _) = child(0, "Linear"), child(1, "Linear")
        return (L.t(x, y) if pre else L.p(x, y)), "Linear"
    if head == "sDot":
        (x, _), (y, _) = child(0, "Linear"), child(1, "Linear")
        return (L.lattice.meet(x, y) if pre else L.lattice.join(x, y)), "Linear"
    if head == "sArr":
        (x, _), (y, _) = child(0, "Linear", flip=True), child(1, "Linear")
        v = L.subt(x, y) if pre else L.limp(x, y)
        return _need(v, "sArr"), "Linear"
    if head == "sGtr":
        (x, _), (y, _) = child(0, "Linear", flip=True), child(1, "Linear")
        lat = L.lattice
        v = (
            coresidual(lat, lat.join, 1, x, y)
            if pre
            else residual(lat, lat.meet, 1, x, y)
        )
        return _need(v, "sGtr"), "Linear"
    if head == "sCirc":
        if pre:
            v, _ = child(0, "BangKernel")
            return h.eb[v], "Linear"
        if h.eq is None:
            raise NoInterpretation("sCirc in succedent position needs a quest kernel")
        v, _ = child(0, "QuestKernel")
        return h.eq[v], "Linear"
    if head == "sBull":
        v, _ = child(0, "Linear")
        if pre:
            if expected == "BangKernel":
                raise NoInterpretation("sBull has no bang interpretation in precedent position")
            if h.ga is None:
                raise NoInterpretation("model has no quest kernel")
            return h.ga[v], "QuestKernel"
        if expected == "QuestKernel":
            raise NoInterpretation("sBull has no quest interpretation in succedent position")
        return h.io[v], "BangKernel"
    if head == "sCopy":
        K = _kernel(h, expected)
        if K is None:
            raise NoInterpretation("model has no quest kernel")
        return (K.top() if pre else K.bottom()), expected
    if head == "sSemi":
        (x, _), (y, _) = child(0, expected), child(1, expected)
        K = _kernel(h, expected)
        return (K.meet(x, y) if pre else K.join(x, y)), expected
    if head == "sKarr":
        (x, _), (y, _) = child(0, expected, flip=True), child(1, expected)
        K = _kernel(h, expected)
        v = K.coimp(x, y) if pre else K.imp(x, y)
        return _need(v, "sKarr"), expected
    if head == "sTriu":
        if not pre:
            raise NoInterpretation("sTriu has no succedent interpretation")
        (g, _), (p, _) = child(0, "BangKernel"), child(1, "QuestKernel")
        return _triu(h, g, p), "QuestKernel"
    if head == "sTrir":
        if pre:
            raise NoInterpretation("sTrir has no precedent interpretation")
        (g, _), (p, _) = child(0, "BangKernel", flip=True), child(1, "QuestKernel")
        return _rtri_table(h)[(g, p)], "QuestKernel"
    if head == "sTril":
        if pre:
            raise NoInterpretation("sTril has no precedent interpretation")
        (x, _), (p, _) = child(0, "QuestKernel"), child(1, "QuestKernel", flip=True)
        return _tril(h, x, p), "BangKernel"
    if head == "sTrid":
        if not pre:
            raise NoInterpretation("sTrid has no succedent interpretation")
        (p, _), (d, _) = child(0, "QuestKernel"), child(1, "BangKernel")
        return _trid(h, p, d), "BangKernel"
    if head == "sBtrir":
        if not pre:
            raise NoInterpretation("sBtrir has no succedent interpretation")
        (p, _), (g, _) = child(0, "QuestKernel", flip=True), child(1, "BangKernel")
        return _brtri_table(h)[(p, g)], "BangKernel"
    if head == "sBtril":
        if not pre:
            raise NoInterpretation("sBtril has no succedent interpretation")
        (g, _), (d, _) = child(0, "BangKernel"), child(1, "BangKernel", flip=True)
        return _btril(h, g, d), "QuestKernel"
    if head == "sNeg":
        (x, _) = child(0, "Linear", flip=True)
        v = L.subt(x, L.one) if pre else L.limp(x, L.bot)
        return _need(v, "sNeg"), "Linear"
    if head == "sKneg":
        if expected == "QuestKernel":
            v, _ = child(0, "BangKernel", flip=True)
            if pre:
                return _btril(h, h.A.top(), v), "QuestKernel"
            return _rtri_table(h)[(v, h.B.bottom())], "QuestKernel"
        v, _ = child(0, "QuestKernel", flip=True)
        if pre:
            return _brtri_table(h)[(v, h.A.top())], "BangKernel"
        return _tril(h, h.B.bottom(), v), "BangKernel"
    raise NoInterpretation(f"no interpretation for structural head {head!r}")


def sequent_holds(seqpat, assign, h, calc, stype=None):
    if stype is None:
        types = sorted(calc.sequent_types(seqpat))
        if not types:
            raise NoInterpretation("sequent is not typable")
        stype = types[0]
    lv, lt = eval_structure(seqpat.ant, PRECEDENT, stype, assign, h, calc)
    rv, rt = eval_structure(seqpat.suc, SUCCEDENT, stype, assign, h, calc)
    if lt != rt:
        raise NoInterpretation(f"sides evaluate in different carriers {lt}/{rt}")
    if lt == "Linear":
        return h.L.leq(lv, rv)
    return _kernel(h, lt).leq(lv, rv)


@dataclass(frozen=True)
class Valid:
    rule: str


@dataclass(frozen=True)
class Counterexample:
    rule: str
    assignment: Assignment
    direction: str


@dataclass(frozen=True)
class Inapplicable:
    rule: str
    reason: str


def _atom_names(rule):
    out = set()
    for p in rule.premises + (rule.conclusion,):
        for tag in ("L", "R"):
            for _, node in p.side(tag).nodes():
                if isinstance(node, Structure) and node.is_leaf():
                    for g in node.formula.subterms():
                        if g.is_atom():
                            out.add((g.name, "Linear"))
    return out


def check_rule_soundness(rule, h, calc):
    """Exhaustively check a rule's quasi-inequality on a model; for
    bidirectional rules both directions are checked.  The first failing
    assignment (in lexicographic order) is reported."""
    slots = sorted(
        [(m, t) for m, (_, t) in rule.metavars.items()] + list(_atom_names(rule))
    )
    try:
        carriers = [h.carrier(t) for _, t in slots]
    except ModelError as e:
        return Inapplicable(rule.name, str(e))
    mvt = {m: t for m, (kind, t) in rule.metavars.items()}
    stypes = {}
    for p in rule.premises + (rule.conclusion,):
        ts = sorted(calc.sequent_types(p, mvt))
        if not ts:
            return Inapplicable(rule.name, "pattern sequent not typable")
        stypes[p] = ts[0]
    directions = [(rule.premises, rule.conclusion, "dn")]
    if rule.bidirectional:
        directions.append(((rule.conclusion,), rule.premises[0], "up"))
    for combo in itertools.product(*carriers):
        assign = Assignment(
            tuple((name, (val, t)) for (name, t), val in zip(slots, combo))
        )
        for prems, conc, direction in directions:
            try:
                if all(sequent_holds(p, assign, h, calc, stypes[p]) for p in prems):
                    if not sequent_holds(conc, assign, h, calc, stypes[conc]):
                        return Counterexample(rule.name, assign, direction)
            except (ResidualMissing, NoInterpretation) as e:
                return Inapplicable(rule.name, str(e))
    return Valid(rule.name)


def check_consequence(a, b, h, calc):
    """a <= b under every atom assignment (both Linear formulas)."""
    atoms = sorted(
        {g.name for g in a.subterms() if g.is_atom()}
        | {g.name for g in b.subterms() if g.is_atom()}
    )
    for combo in itertools.product(h.L.elems, repeat=len(atoms)):
        assign = Assignment(tuple((n, (v, "Linear")) for n, v in zip(atoms, combo)))
        va, _ = eval_formula(a, assign, h, calc)
        vb, _ = eval_formula(b, assign, h, calc)
        if not h.L.leq(va, vb):
            return False
    return True


# ---------------------------------------------------------------------------
# single-type evaluation (storage operators as tables)


def eval_single(f, assign, alg):
    """Value of a single-typed linear formula in an algebra with storage;
    exponentials evaluate through the bang/quest tables."""
    if f.is_atom() or f.is_mvar():
        return assign[f.name]
    vals = [eval_single(a, assign, alg) for a in f.args]
    head = f.head
    lat = alg.lattice
    table = {
        "one": lambda: alg.one,
        "bot": lambda: alg.bot,
        "top": lat.top,
        "zero": lat.bottom,
        "tensor": lambda: alg.t(*vals),
        "par": lambda: alg.p(*vals),
        "with": lambda: lat.meet(*vals),
        "plus": lambda: lat.join(*vals),
        "limp": lambda: _need(alg.limp(*vals), "limp"),
        "coimp": lambda: _need(alg.subt(*vals), "coimp"),
        "lneg": lambda: _need(alg.limp(vals[0], alg.bot), "lneg"),
        "rneg": lambda: _need(alg.subt(vals[0], alg.one), "rneg"),
    }
    if head in table:
        return table[head]()
    if head == "dia" and f.args[0].head == "bsq":
        return alg.bang[eval_single(f.args[0].args[0], assign, alg)]
    if head == "box" and f.args[0].head == "bdia":
        return alg.quest[eval_single(f.args[0].args[0], assign, alg)]
    raise NoInterpretation(f"single-type evaluation cannot handle {head!r}")


# ---------------------------------------------------------------------------
# model files


def _closure(elems, pairs):
    rel = set(pairs) | {(e, e) for e in elems}
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return frozenset(rel)


def _parse_lattice(items):
    elems = tuple(items["elems"])
    pairs = [(p[0], p[1]) for p in items["leq"]]
    return FiniteLattice(elems, _closure(elems, pairs))


def _collect(forms):
    items = {}
    ops = {}
    consts = {}
    maps = {}
    for f in forms:
        tag = f[0]
        if tag in ("elems", "leq"):
            items[tag] = f[1:]
        elif tag == "op":
            ops[f[1]] = f[2]
        elif tag == "const":
            consts[f[1]] = f[2]
        elif tag == "map":
            maps[f[1]] = f[2]
    return items, ops, consts, maps


def _binop(rows):
    return {(r[0], r[1]): r[2] for r in rows}


def _unop(rows):
    return {r[0]: r[1] for r in rows}


def parse_algebra(text):
    form = sexpr.parse(text)
    if form[0] != "algebra":
        raise ModelError("expected (algebra NAME ...)")
    name = form[1]
    items, ops, consts, _ = _collect(form[2:])
    lat = _parse_lattice(items)
    return FiniteILAlgebra(
        name=name,
        lattice=lat,
        tensor=_binop(ops["tensor"]),
        par=_binop(ops["par"]),
        one=consts["one"],
        bot=consts["bot"],
        bang=_unop(ops["bang"]) if "bang" in ops else None,
        quest=_unop(ops["quest"]) if "quest" in ops else None,
    )


def parse_het(text):
    form = sexpr.parse(text)
    if form[0] != "het":
        raise ModelError("expected (het NAME ...)")
    name = form[1]
    uses = {}
    maps = {}
    for f in form[2:]:
        if f[0] == "use":
            uses[f[1]] = f[2:]
        elif f[0] == "map":
            maps[f[1]] = _unop(f[2])
    items, ops, consts, _ = _collect(uses["L"])
    L = FiniteILAlgebra(
        name=name + ".L",
        lattice=_parse_lattice(items),
        tensor=_binop(ops["tensor"]),
        par=_binop(ops["par"]),
        one=consts["one"],
        bot=consts["bot"],
    )
    items_a, _, _, _ = _collect(uses["A"])
    A = KernelAlgebra(_parse_lattice(items_a))
    B = None
    if "B" in uses:
        items_b, _, _, _ = _collect(uses["B"])
        B = KernelAlgebra(_parse_lattice(items_b))
    het = FiniteHetAlgebra(
        name=name,
        L=L,
        A=A,
        B=B,
        eb=maps["eb"],
        io=maps["io"],
        eq=maps.get("eq"),
        ga=maps.get("ga"),
    )
    het.derive_paired_maps()
    return het


def load_model(path):
    with open(path, encoding="ascii") as fh:
        text = fh.read()
    head = sexpr.parse(text)[0]
    if head == "algebra":
        return parse_algebra(text)
    if head == "het":
        return parse_het(text)
    raise ModelError(f"unknown model file kind {head!r}")


def as_het(model):
    """Promote a single-type algebra with storage to its heterogeneous form."""
    if isinstance(model, FiniteHetAlgebra):
        return model
    return kernel_of(model)
