"""Bounded backward proof search over the cut-free rule set, plus the
exponential macro derivations.

The search is deterministic.  Depth counts non-display rule applications on
a branch; display postulates and exchange are explored as an orbit around
each goal (bounded by the postulate budget) since they never change
derivability.  Failure is memoized per (canonical goal, contraction budget)
at the depth it was established, goals already on the current branch are
not re-entered, and invertible introductions are applied eagerly.
"""

from __future__ import annotations

from collections import deque
from heapq import heappop, heappush
from dataclasses import dataclass, field

from .calculus import CalculusError
from .derivation import Derivation, match_sequent, subst_sequent
from .derived import expand_identity
from .display import DisplayTrace, _display_moves, apply_forward, normalize_display
from .terms import Formula, Sequent, Structure, leaf


@dataclass(frozen=True)
class SearchConfig:
    depth: int = 30
    postulate_budget: int = 64
    invertible_first: bool = True
    contraction_budget: int = 3
    size_slack: int = 16  # orbit variants/subgoals may exceed the goal size by this much
    variant_cap: int = 8  # context splits attempted per rule and goal

    def __post_init__(self):
        assert self.depth > 0 and self.postulate_budget > 0


@dataclass(frozen=True)
class Exhausted:
    bound: int

    def __bool__(self):
        return False


def _pattern_key(side):
    """Root-shape discrimination key of a pattern side: a concrete structural
    head, ('leaf', formula head) for a concrete formula leaf, or None."""
    if side.is_mvar():
        return None
    if side.is_leaf():
        f = side.formula
        return None if f.is_mvar() else ("leaf", f.head)
    return side.head


def _node_key(side):
    """Discrimination key of a concrete sequent side."""
    if side.is_leaf():
        return ("leaf", side.formula.head)
    return side.head


def _shape_fits(want, seq):
    wa, ws = want
    return _side_fits(wa, seq.ant) and _side_fits(ws, seq.suc)


def _side_fits(key, side):
    if key is None:
        return True
    if isinstance(key, tuple):
        return side.is_leaf() and side.formula.head == key[1]
    return side.head == key


def _has_compound(seq):
    return any(
        not f.is_atom()
        for side in (seq.ant, seq.suc)
        for f in side.leaf_formulas()
    )


_ADDITIVE_HEADS = frozenset({"with", "plus", "top", "zero"})
_ADDITIVE_STRUCT = frozenset({"sI", "sDot", "sGtr"})


def _features(seq):
    """Formula/structure material classes present in a sequent."""
    out = set()
    for side in (seq.ant, seq.suc):
        for _, node in side.nodes():
            if isinstance(node, Structure):
                if node.head in _ADDITIVE_STRUCT:
                    out.add("additive")
            elif node.head in _ADDITIVE_HEADS:
                out.add("additive")
    return out


def _contraction_useful(name, seq):
    if not _has_compound(seq):
        return False
    if name.startswith("C_a"):
        return any(
            g.head in _ADDITIVE_HEADS
            for side in (seq.ant, seq.suc)
            for f in side.leaf_formulas()
            for g in f.subterms()
        )
    return True


def prove(goal, calc, cfg=SearchConfig()):
    """Search for a cut-free derivation of `goal`; returns a Derivation that
    passes check, or Exhausted(depth bound)."""
    return _Prover(calc, cfg).prove(goal)


class _Prover:
    def __init__(self, calc, cfg):
        self.calc = calc
        self.cfg = cfg
        self.success = {}  # canon -> Derivation (of some orbit variant)
        self.failed = {}  # (canon, budgets) -> depth at which failure is known
        self.on_path = set()
        self.canon_cache = {}
        self.orbit_cache = {}
        self.branch_rules = self._branch_rules()
        self.axiom_rules = [i for i in self.branch_rules if not i.subgoals]
        self.orbit_moves = self._orbit_moves()
        self.canon_moves = tuple(_display_moves(calc))
        self.eager_rules = self._eager_rules()
        self.eager_shape = {
            i.name: (_pattern_key(i.goal.ant), _pattern_key(i.goal.suc))
            for i in self.eager_rules
        }
        self.contraction_rules = {r.name for r in calc.rules if r.name.startswith("C_")}
        # interaction (Grishin-type) moves share the contraction budget: no
        # regression target needs more than a couple per branch
        self.interaction_rules = {
            r.name for r in calc.rules if r.name.startswith(("Gri_", "coGri_"))
        }
        self.rule_shape = {
            i.name: (_pattern_key(i.goal.ant), _pattern_key(i.goal.suc))
            for i in self.branch_rules
        }
        # family gates: a rule family is only worth trying when formulas of
        # the corresponding material occur in the goal class
        self.rule_family = {}
        for r in calc.rules:
            base = r.name.rsplit("_", 1)
            if len(base) == 2 and base[1] in ("a1", "a2", "a"):
                self.rule_family[r.name] = "additive"
            elif r.name in ("res_a1", "res_a2", "unit_a1", "unit_a2"):
                self.rule_family[r.name] = "additive"

    def _branch_rules(self):
        """Depth-consuming backward moves: the non-invertible rules only
        (invertible ones are orbit moves), ordered axioms, introductions,
        structural rules, and contractions last."""
        axioms, intros1, intros2, structs, contr = [], [], [], [], []
        for r in self.calc.rules:
            if r.is_cut or r.is_display or r.bidirectional or r.name.startswith("E_"):
                continue
            has_op = any(
                s.is_leaf() and not s.formula.is_mvar()
                for tag in ("L", "R")
                for s in [r.conclusion.side(tag)]
            )
            if not r.premises:
                axioms.append(r.name)
            elif has_op:
                (intros1 if len(r.premises) == 1 else intros2).append(r.name)
            elif r.name.startswith("C_"):
                contr.append(r.name)
            else:
                structs.append(r.name)
        names = axioms + intros1 + intros2 + structs + contr
        return [self.calc.inference(n) for n in names]

    def _orbit_moves(self):
        """Invertible moves: every bidirectional rule in both directions, the
        self-inverse exchange rules, and non-bidirectional display postulates
        (Galois flips), indexed by the root shape of the sequent they apply
        to."""
        infs = []
        for r in self.calc.rules:
            if r.bidirectional:
                infs.append(self.calc.inference(r.name + ".dn"))
                infs.append(self.calc.inference(r.name + ".up"))
            elif r.is_display or r.name.startswith("E_"):
                infs.append(self.calc.inference(r.name))
        index = {}
        for inf in infs:
            key = (_pattern_key(inf.subgoals[0].ant), _pattern_key(inf.subgoals[0].suc))
            index.setdefault(key, []).append(inf)
        return index

    def _moves_for(self, seq, features):
        """Orbit moves compatible with `seq`'s root shape and the formula
        material of its class."""
        ka = _node_key(seq.ant)
        ks = _node_key(seq.suc)
        out = []
        for key in ((ka, ks), (ka, None), (None, ks), (None, None)):
            for inf in self.orbit_moves.get(key, ()):
                fam = self.rule_family.get(inf.name.split(".")[0])
                if fam is None or fam in features:
                    out.append(inf)
        return out

    def _eager_rules(self):
        """Single-premise invertible introductions: left intros of F-heads and
        right intros of G-heads."""
        out = []
        for r in self.calc.rules:
            if r.is_cut or len(r.premises) != 1 or r.bidirectional:
                continue
            for tag, want in (("L", "F"), ("R", "G")):
                side = r.conclusion.side(tag)
                if side.is_leaf() and not side.formula.is_mvar() and not side.formula.is_atom():
                    sigs = self.calc.op_sigs.get(side.formula.head)
                    if sigs and sigs[0].family == want:
                        out.append(self.calc.inference(r.name))
        return out

    def canon_route(self, seq):
        """(canonical form, route of display moves seq -> canon)."""
        hit = self.canon_cache.get(seq)
        if hit is not None:
            return hit
        cur = seq
        route = []
        while True:
            best = None
            for inf in self.canon_moves:
                nxt = apply_forward(inf, cur, self.calc)
                if nxt is not None and nxt.suc.size() < cur.suc.size():
                    best = (inf.name, nxt)
                    break
            if best is None:
                break
            route.append(best[0])
            cur = best[1]
        out = (cur, tuple(route))
        self.canon_cache[seq] = out
        return out

    def canon(self, seq):
        return self.canon_route(seq)[0]

    ORBIT_SLACK = 4  # invertible moves may grow a goal by this much

    def orbit_of_canon(self, canon):
        """Closure of a canonical goal under invertible moves, smallest
        variants first, bounded by budget and size cap: [(variant, route)]."""
        cached = self.orbit_cache.get(canon)
        if cached is not None:
            return cached
        cap = min(canon.size() + self.ORBIT_SLACK, self.max_size)
        features = _features(canon)
        seen = {canon}
        out = [(canon, ())]
        heap = [(canon.size(), 0, canon, ())]
        counter = 1
        while heap and len(out) < self.cfg.postulate_budget:
            _, _, cur, route = heappop(heap)
            for inf in self._moves_for(cur, features):
                nxt = apply_forward(inf, cur, self.calc)
                if nxt is None or nxt in seen:
                    continue
                if nxt.size() > cap:
                    continue
                seen.add(nxt)
                item = (nxt, route + (inf.name,))
                out.append(item)
                heappush(heap, (nxt.size(), counter, nxt, item[1]))
                counter += 1
        self.orbit_cache[canon] = out
        return out

    def orbit(self, seq):
        """Orbit of a goal, with routes based at the goal itself."""
        canon, prefix = self.canon_route(seq)
        base = self.orbit_of_canon(canon)
        if not prefix:
            return base
        return [(v, prefix + r) for v, r in base]

    def prove(self, goal):
        """Iterative deepening up to cfg.depth; memo tables persist across
        iterations, so shallow proofs are found before deep failures cost."""
        self.max_size = goal.size() + self.cfg.size_slack
        for depth in range(1, self.cfg.depth + 1):
            d = self.solve(goal, depth, self.cfg.contraction_budget)
            if d is not None:
                return d
        return Exhausted(self.cfg.depth)

    def solve(self, seq, depth, cbudget):
        canon = self.canon(seq)
        hit = self.success.get(canon)
        if hit is not None:
            rebased = self._rebase(hit, seq)
            if rebased is not None:
                return rebased
        # dominance pruning: failure with at least these resources is final
        frontier = self.failed.get(canon)
        if frontier and any(d >= depth and cb >= cbudget for d, cb in frontier):
            return None
        key = (canon, cbudget)
        if key in self.on_path:
            return None
        self.on_path.add(key)
        try:
            found = self._attempt(seq, depth, cbudget)
        finally:
            self.on_path.discard(key)
        if found is not None:
            self.success[canon] = found
            return found
        frontier = self.failed.setdefault(canon, [])
        frontier[:] = [
            (d, cb) for d, cb in frontier if not (d <= depth and cb <= cbudget)
        ]
        frontier.append((depth, cbudget))
        return None

    def _rebase(self, d, seq):
        if d.conclusion == seq:
            return d
        for variant, route in self.orbit(seq):
            if variant == d.conclusion:
                return DisplayTrace(seq, route, variant).as_derivation(d, self.calc)
        return None

    def _attempt(self, seq, depth, cbudget):
        # identity shortcut
        if (
            seq.ant.is_leaf()
            and seq.suc.is_leaf()
            and seq.ant.formula == seq.suc.formula
        ):
            try:
                return expand_identity(seq.ant.formula, self.calc)
            except CalculusError:
                pass
        variants = self.orbit(seq)
        # eager invertible introductions: committing to the first one on any
        # orbit variant is safe (the inverted premise is equiderivable), and
        # it does not consume depth since the goal shrinks
        if self.cfg.invertible_first:
            for variant, route in variants:
                for inf in self.eager_rules:
                    if not _shape_fits(self.eager_shape[inf.name], variant):
                        continue
                    subst = match_sequent(inf.goal, variant, {}, inf.schema, self.calc)
                    if subst is None:
                        continue
                    sub = self.solve(subst_sequent(inf.subgoals[0], subst), depth, cbudget)
                    if sub is None:
                        return None
                    node = Derivation(inf.name, variant, (sub,))
                    if route:
                        node = DisplayTrace(seq, route, variant).as_derivation(
                            node, self.calc
                        )
                    return node
        rules = self.branch_rules if depth > 0 else self.axiom_rules
        for inf in rules:
            want = self.rule_shape[inf.name]
            tried = 0
            for variant, route in variants:
                if not _shape_fits(want, variant):
                    continue
                subst = match_sequent(inf.goal, variant, {}, inf.schema, self.calc)
                if subst is None:
                    continue
                tried += 1
                if tried > self.cfg.variant_cap:
                    break
                nb = cbudget
                if inf.name in self.contraction_rules:
                    # duplication is budgeted, and pointless unless material
                    # that can be introduced twice is around: additive
                    # contraction needs additive formulas, the rest compound
                    # formulas at all
                    if nb == 0 or not _contraction_useful(inf.name, variant):
                        continue
                    nb -= 1
                elif inf.name in self.interaction_rules and nb == 0:
                    continue
                elif inf.name in self.interaction_rules:
                    nb -= 1
                subgoals = [subst_sequent(pat, subst) for pat in inf.subgoals]
                if any(sg.size() > self.max_size for sg in subgoals):
                    continue
                order = sorted(range(len(subgoals)), key=lambda i: subgoals[i].size())
                subs = [None] * len(subgoals)
                ok = True
                for i in order:
                    sub = self.solve(subgoals[i], depth - 1, nb)
                    if sub is None:
                        ok = False
                        break
                    subs[i] = sub
                if not ok:
                    continue
                node = Derivation(inf.name, variant, tuple(subs))
                if route:
                    node = DisplayTrace(seq, route, variant).as_derivation(node, self.calc)
                return node
        return None


# ---------------------------------------------------------------------------
# macro derivations for the translated exponential rules

MACROS = (
    "dereliction-L",
    "dereliction-R",
    "weakening-L",
    "weakening-R",
    "contraction-L",
    "contraction-R",
    "promotion-L",
    "promotion-R",
)


class MacroError(ValueError):
    pass


def _chain(d, *steps):
    """Extend a derivation downward: each step is (inference_name, conclusion)."""
    from . import syntax

    for name, conc in steps:
        d = Derivation(name, conc, (d,))
    return d


def _s(calc, text, **binds):
    from . import syntax

    out = syntax.parse_sequent(text, calc) if isinstance(text, str) else text
    return out


def expand_macro(name, fillers, calc, formula=None):
    """Splice filler derivations into one of the derived exponential rules.

    dereliction-L   filler X , A |- Y        gives  X , !A |- Y
    dereliction-R   filler X |- A , Y        gives  X |- ?A , Y
    weakening-L     filler X |- Y (+formula) gives  X , !A |- Y
    weakening-R     filler X |- Y (+formula) gives  X |- ?A , Y
    contraction-L   filler X , (!A , !A) |- Y   gives X , !A |- Y
    contraction-R   filler X |- (?A , ?A) , Y   gives X |- ?A , Y
    promotion-L     filler oΓ , A |- oΠ      gives  oΓ , ?A |- oΠ   (paired)
    promotion-R     filler oΓ |- A , oΠ      gives  oΓ |- !A , oΠ   (paired)

    where !A and ?A abbreviate the composite modalities.
    """
    if name not in MACROS:
        raise MacroError(f"unknown macro {name!r}")
    builder = globals()["_macro_" + name.replace("-", "_").lower()]
    return builder(list(fillers), calc, formula)


def _c(head, *args):
    return Structure(head, tuple(args))


def _fleaf(head, *args):
    return leaf(Formula(head, tuple(args)))


def _bang(a):
    return Formula("dia", (Formula("bsq", (a,)),))


def _quest(a):
    return Formula("box", (Formula("bdia", (a,)),))


def _split_comma_l(seq):
    if seq.ant.head != "sComma" or not seq.ant.args[1].is_leaf():
        raise MacroError(f"filler must conclude X , A |- Y, got {seq!r}")
    return seq.ant.args[0], seq.ant.args[1].formula, seq.suc


def _macro_dereliction_l(fillers, calc, formula):
    (d,) = fillers
    x, a, y = _split_comma_l(d.conclusion)
    arr = _c("sArr", x, y)
    return _chain(
        d,
        ("res_m1.up", Sequent(leaf(a), arr)),
        ("bsqL", Sequent(_fleaf("bsq", a), _c("sBull", arr))),
        ("adj_bL.up", Sequent(_c("sCirc", _fleaf("bsq", a)), arr)),
        ("diaL", Sequent(leaf(_bang(a)), arr)),
        ("res_m1.dn", Sequent(_c("sComma", x, leaf(_bang(a))), y)),
    )


def _macro_dereliction_r(fillers, calc, formula):
    (d,) = fillers
    seq = d.conclusion
    if seq.suc.head != "sComma" or not seq.suc.args[0].is_leaf():
        raise MacroError(f"filler must conclude X |- A , Y, got {seq!r}")
    x, a, y = seq.ant, seq.suc.args[0].formula, seq.suc.args[1]
    arr = _c("sArr", y, x)
    return _chain(
        d,
        ("E_m2", Sequent(x, _c("sComma", y, leaf(a)))),
        ("res_m2.up", Sequent(arr, leaf(a))),
        ("bdiaR", Sequent(_c("sBull", arr), _fleaf("bdia", a))),
        ("adj_qL.dn", Sequent(arr, _c("sCirc", _fleaf("bdia", a)))),
        ("boxR", Sequent(arr, leaf(_quest(a)))),
        ("res_m2.dn", Sequent(x, _c("sComma", y, leaf(_quest(a))))),
        ("E_m2", Sequent(x, _c("sComma", leaf(_quest(a)), y))),
    )


def _macro_weakening_l(fillers, calc, formula):
    (d,) = fillers
    if formula is None:
        raise MacroError("weakening-L needs the formula to weaken in")
    x, y = d.conclusion.ant, d.conclusion.suc
    a = formula
    arr = _c("sArr", x, y)
    bx = _fleaf("bsq", a)
    bar = _c("sBull", arr)
    return _chain(
        d,
        ("unit_m1.up", Sequent(_c("sComma", _c("sPhi"), x), y)),
        ("res_m1.up", Sequent(_c("sPhi"), arr)),
        ("nec_bL.up", Sequent(_c("sCirc", _c("sCopy")), arr)),
        ("adj_bL.dn", Sequent(_c("sCopy"), bar)),
        ("W_b1", Sequent(_c("sSemi", _c("sCopy"), bx), bar)),
        ("unit_b1.dn", Sequent(bx, bar)),
        ("adj_bL.up", Sequent(_c("sCirc", bx), arr)),
        ("diaL", Sequent(leaf(_bang(a)), arr)),
        ("res_m1.dn", Sequent(_c("sComma", x, leaf(_bang(a))), y)),
    )


def _macro_weakening_r(fillers, calc, formula):
    (d,) = fillers
    if formula is None:
        raise MacroError("weakening-R needs the formula to weaken in")
    x, y = d.conclusion.ant, d.conclusion.suc
    a = formula
    arr = _c("sArr", y, x)
    qa = _fleaf("bdia", a)
    bar = _c("sBull", arr)
    return _chain(
        d,
        ("unit_m2.up", Sequent(x, _c("sComma", y, _c("sPhi")))),
        ("res_m2.up", Sequent(arr, _c("sPhi"))),
        ("nec_qL.up", Sequent(arr, _c("sCirc", _c("sCopy")))),
        ("adj_qL.up", Sequent(bar, _c("sCopy"))),
        ("W_q2", Sequent(bar, _c("sSemi", _c("sCopy"), qa))),
        ("E_q2", Sequent(bar, _c("sSemi", qa, _c("sCopy")))),
        ("unit_q2.dn", Sequent(bar, qa)),
        ("adj_qL.dn", Sequent(arr, _c("sCirc", qa))),
        ("boxR", Sequent(arr, leaf(_quest(a)))),
        ("res_m2.dn", Sequent(x, _c("sComma", y, leaf(_quest(a))))),
        ("E_m2", Sequent(x, _c("sComma", leaf(_quest(a)), y))),
    )


def _bang_axiom(a, calc):
    """Cut-free derivation of o(bsq A) |- !A."""
    ida = expand_identity(a, calc)
    bx = _fleaf("bsq", a)
    d = _chain(
        ida,
        ("bsqL", Sequent(bx, _c("sBull", leaf(a)))),
    )
    d = Derivation("bsqR", Sequent(bx, bx), (d,))
    return Derivation("diaR", Sequent(_c("sCirc", bx), leaf(_bang(a))), (d,))


def _quest_axiom(a, calc):
    """Cut-free derivation of ?A |- o(bdia A)."""
    ida = expand_identity(a, calc)
    qa = _fleaf("bdia", a)
    d = _chain(ida, ("bdiaR", Sequent(_c("sBull", leaf(a)), qa)))
    d = Derivation("bdiaL", Sequent(qa, qa), (d,))
    return Derivation("boxL", Sequent(leaf(_quest(a)), _c("sCirc", qa)), (d,))


def _macro_contraction_l(fillers, calc, formula):
    (d,) = fillers
    seq = d.conclusion
    ok = (
        seq.ant.head == "sComma"
        and seq.ant.args[1].head == "sComma"
        and seq.ant.args[1].args[0].is_leaf()
        and seq.ant.args[1].args[0] == seq.ant.args[1].args[1]
    )
    if not ok:
        raise MacroError("filler must conclude X , (!A , !A) |- Y")
    x = seq.ant.args[0]
    bang = seq.ant.args[1].args[0].formula
    if not (bang.head == "dia" and bang.args[0].head == "bsq"):
        raise MacroError("contracted formula must be a bang")
    a = bang.args[0].args[0]
    y = seq.suc
    z = _c("sArr", x, y)
    bx = _fleaf("bsq", a)
    ob = _c("sCirc", bx)
    strip = _bang_axiom(a, calc)
    d = _chain(d, ("res_m1.up", Sequent(_c("sComma", leaf(bang), leaf(bang)), z)))
    d = _chain(d, ("res_m1.up", Sequent(leaf(bang), _c("sArr", leaf(bang), z))))
    d = Derivation("CutL", Sequent(ob, _c("sArr", leaf(bang), z)), (strip, d))
    d = _chain(
        d,
        ("res_m1.dn", Sequent(_c("sComma", leaf(bang), ob), z)),
        ("E_m1", Sequent(_c("sComma", ob, leaf(bang)), z)),
        ("res_m1.up", Sequent(leaf(bang), _c("sArr", ob, z))),
    )
    d = Derivation("CutL", Sequent(ob, _c("sArr", ob, z)), (strip, d))
    return _chain(
        d,
        ("res_m1.dn", Sequent(_c("sComma", ob, ob), z)),
        ("reg_bL.up", Sequent(_c("sCirc", _c("sSemi", bx, bx)), z)),
        ("adj_bL.dn", Sequent(_c("sSemi", bx, bx), _c("sBull", z))),
        ("C_b1", Sequent(bx, _c("sBull", z))),
        ("adj_bL.up", Sequent(ob, z)),
        ("diaL", Sequent(leaf(bang), z)),
        ("res_m1.dn", Sequent(_c("sComma", x, leaf(bang)), y)),
    )


def _macro_contraction_r(fillers, calc, formula):
    (d,) = fillers
    seq = d.conclusion
    ok = (
        seq.suc.head == "sComma"
        and seq.suc.args[0].head == "sComma"
        and seq.suc.args[0].args[0].is_leaf()
        and seq.suc.args[0].args[0] == seq.suc.args[0].args[1]
    )
    if not ok:
        raise MacroError("filler must conclude X |- (?A , ?A) , Y")
    x = seq.ant
    quest = seq.suc.args[0].args[0].formula
    if not (quest.head == "box" and quest.args[0].head == "bdia"):
        raise MacroError("contracted formula must be a quest")
    a = quest.args[0].args[0]
    y = seq.suc.args[1]
    pair = seq.suc.args[0]
    z = _c("sArr", y, x)
    qa = _fleaf("bdia", a)
    oq = _c("sCirc", qa)
    strip = _quest_axiom(a, calc)
    d = _chain(
        d,
        ("E_m2", Sequent(x, _c("sComma", y, pair))),
        ("res_m2.up", Sequent(z, pair)),
        ("res_m2.up", Sequent(_c("sArr", leaf(quest), z), leaf(quest))),
    )
    d = Derivation("CutL", Sequent(_c("sArr", leaf(quest), z), oq), (d, strip))
    d = _chain(
        d,
        ("res_m2.dn", Sequent(z, _c("sComma", leaf(quest), oq))),
        ("E_m2", Sequent(z, _c("sComma", oq, leaf(quest)))),
        ("res_m2.up", Sequent(_c("sArr", oq, z), leaf(quest))),
    )
    d = Derivation("CutL", Sequent(_c("sArr", oq, z), oq), (d, strip))
    return _chain(
        d,
        ("res_m2.dn", Sequent(z, _c("sComma", oq, oq))),
        ("reg_qL.up", Sequent(z, _c("sCirc", _c("sSemi", qa, qa)))),
        ("adj_qL.up", Sequent(_c("sBull", z), _c("sSemi", qa, qa))),
        ("C_q2", Sequent(_c("sBull", z), qa)),
        ("adj_qL.dn", Sequent(z, oq)),
        ("boxR", Sequent(z, leaf(quest))),
        ("res_m2.dn", Sequent(x, _c("sComma", y, leaf(quest)))),
        ("E_m2", Sequent(x, _c("sComma", leaf(quest), y))),
    )


def _macro_promotion_l(fillers, calc, formula):
    (d,) = fillers
    seq = d.conclusion
    ok = (
        seq.ant.head == "sComma"
        and seq.ant.args[0].head == "sCirc"
        and seq.ant.args[1].is_leaf()
        and seq.suc.head == "sCirc"
    )
    if not ok:
        raise MacroError("filler must conclude oG , A |- oP")
    og, a, op_ = seq.ant.args[0], seq.ant.args[1].formula, seq.suc
    g, p = og.args[0], op_.args[0]
    qa = _quest(a)
    tri = _c("sTrir", g, p)
    return _chain(
        d,
        ("res_m1.up", Sequent(leaf(a), _c("sArr", og, op_))),
        ("FS_bqR.up", Sequent(leaf(a), _c("sCirc", tri))),
        ("adj_qL.up", Sequent(_c("sBull", leaf(a)), tri)),
        ("bdiaL", Sequent(_fleaf("bdia", a), tri)),
        ("boxL", Sequent(leaf(qa), _c("sCirc", tri))),
        ("FS_bqR.dn", Sequent(leaf(qa), _c("sArr", og, op_))),
        ("res_m1.dn", Sequent(_c("sComma", og, leaf(qa)), op_)),
    )


def _macro_promotion_r(fillers, calc, formula):
    (d,) = fillers
    seq = d.conclusion
    ok = (
        seq.suc.head == "sComma"
        and seq.suc.args[0].is_leaf()
        and seq.suc.args[1].head == "sCirc"
        and seq.ant.head == "sCirc"
    )
    if not ok:
        raise MacroError("filler must conclude oG |- A , oP")
    og, a, op_ = seq.ant, seq.suc.args[0].formula, seq.suc.args[1]
    g, p = og.args[0], op_.args[0]
    ba = _bang(a)
    tri = _c("sBtrir", p, g)
    return _chain(
        d,
        ("E_m2", Sequent(og, _c("sComma", op_, leaf(a)))),
        ("res_m2.up", Sequent(_c("sArr", op_, og), leaf(a))),
        ("FS_qbL.up", Sequent(_c("sCirc", tri), leaf(a))),
        ("adj_bL.dn", Sequent(tri, _c("sBull", leaf(a)))),
        ("bsqR", Sequent(tri, _fleaf("bsq", a))),
        ("diaR", Sequent(_c("sCirc", tri), leaf(ba))),
        ("FS_qbL.dn", Sequent(_c("sArr", op_, og), leaf(ba))),
        ("res_m2.dn", Sequent(og, _c("sComma", op_, leaf(ba)))),
        ("E_m2", Sequent(og, _c("sComma", leaf(ba), op_))),
    )
