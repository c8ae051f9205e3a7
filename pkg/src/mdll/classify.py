"""Analytic inductive inequalities over the three-typed term language that
interprets into heterogeneous algebras.

Grammar (s-expressions; bare identifiers are variables, their types are
inferred):

    Linear       A ::= v | (one) | (bot) | (top) | (zero) | (tensor A A)
                     | (par A A) | (limp A A) | (coimp A A) | (with A A)
                     | (plus A A) | (eb K!) | (eq K?)
    BangKernel   a ::= v | (ib A) | (kt) | (kf) | (kand a a) | (kor a a)
                     | (kimp a a) | (brtri x a)
    QuestKernel  x ::= v | (gq A) | (kt) | (kf) | (kand x x) | (kor x x)
                     | (kcoimp x x) | (rtri a x)

An inequality is (leq LHS RHS).  Classification searches for an order type
over the variables and a strict dependency order witnessing the inductive
shape; branches ending in constants carry no variable and are exempt from
the good-branch requirement.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from . import sexpr
from .terms import Formula, fvar

# head -> (input types, output type, eps, family); kernel heads are
# overloaded over both kernel types with the same tonicity and family.
_B, _Q, _L = "BangKernel", "QuestKernel", "Linear"

MT_SIGNATURE = {
    "one": ((), _L, (), "F"),
    "bot": ((), _L, (), "G"),
    "top": ((), _L, (), "F"),
    "zero": ((), _L, (), "G"),
    "tensor": ((_L, _L), _L, ("+", "+"), "F"),
    "par": ((_L, _L), _L, ("+", "+"), "G"),
    "limp": ((_L, _L), _L, ("-", "+"), "G"),
    "coimp": ((_L, _L), _L, ("-", "+"), "F"),
    "with": ((_L, _L), _L, ("+", "+"), "F"),
    "plus": ((_L, _L), _L, ("+", "+"), "G"),
    "eb": ((_B,), _L, ("+",), "F"),
    "ib": ((_L,), _B, ("+",), "G"),
    "eq": ((_Q,), _L, ("+",), "G"),
    "gq": ((_L,), _Q, ("+",), "F"),
    "rtri": ((_B, _Q), _Q, ("-", "+"), "G"),
    "brtri": ((_Q, _B), _B, ("-", "+"), "F"),
}

_KERNEL_OVERLOADS = {
    "kt": ((), ("+",)[:0], "F"),
    "kf": ((), (), "G"),
    "kand": ((0, 0), ("+", "+"), "F"),
    "kor": ((0, 0), ("+", "+"), "G"),
}
LATTICE_HEADS = {"kand", "kor", "with", "plus"}


def _head_info(head, ktype=None):
    """(input types, eps, family) for a head; kernel heads take the kernel
    type they are used at."""
    if head in MT_SIGNATURE:
        ins, _, eps, fam = MT_SIGNATURE[head]
        return ins, eps, fam
    if head == "kt":
        return (), (), "F"
    if head == "kf":
        return (), (), "G"
    if head == "kand":
        return (ktype, ktype), ("+", "+"), "F"
    if head == "kor":
        return (ktype, ktype), ("+", "+"), "G"
    if head == "kimp":
        return (_B, _B), ("-", "+"), "G"
    if head == "kcoimp":
        return (_Q, _Q), ("-", "+"), "F"
    raise ClassifyError(f"unknown head {head!r}")


class ClassifyError(ValueError):
    pass


@dataclass(frozen=True)
class Inequality:
    lhs: Formula
    rhs: Formula
    var_types: dict = None

    def variables(self):
        seen = []
        for f in itertools.chain(self.lhs.subterms(), self.rhs.subterms()):
            if f.is_mvar() and f.name not in seen:
                seen.append(f.name)
        return seen


@dataclass(frozen=True)
class Analytic:
    epsilon: dict  # var -> 1 | 'd'
    omega: tuple  # strict dependency pairs (smaller, larger)

    verdict = "Analytic"


@dataclass(frozen=True)
class NotAnalytic:
    reason: str

    verdict = "NotAnalytic"


# -- parsing and typing -------------------------------------------------------


def _build(form):
    if isinstance(form, str):
        return fvar(str(form))
    head = str(form[0])
    if head not in MT_SIGNATURE and head not in ("kt", "kf", "kand", "kor", "kimp", "kcoimp"):
        raise ClassifyError(f"unknown head {head!r}")
    return Formula(head, tuple(_build(a) for a in form[1:]))


def parse_inequality(text):
    form = sexpr.parse(text)
    if isinstance(form, str) or len(form) != 3 or str(form[0]) != "leq":
        raise ClassifyError("expected (leq LHS RHS)")
    return make_inequality(_build(form[1]), _build(form[2]))


def make_inequality(lhs, rhs):
    ineq = Inequality(lhs, rhs)
    var_types = _infer_types(ineq)
    return Inequality(lhs, rhs, var_types)


def _possible(f, assign):
    if f.is_mvar():
        return {assign[f.name]} if f.name in assign else {_L, _B, _Q}
    child = [_possible(a, assign) for a in f.args]
    if f.head in MT_SIGNATURE:
        ins, out, _, _ = MT_SIGNATURE[f.head]
        if all(ins[i] in child[i] for i in range(len(ins))):
            return {out}
        return set()
    if f.head in ("kt", "kf"):
        return {_B, _Q}
    if f.head in ("kand", "kor"):
        return {t for t in (_B, _Q) if all(t in c for c in child)}
    if f.head == "kimp":
        return {_B} if all(_B in c for c in child) else set()
    if f.head == "kcoimp":
        return {_Q} if all(_Q in c for c in child) else set()
    raise ClassifyError(f"unknown head {f.head!r}")


def _infer_types(ineq):
    """Pick the lexicographically first variable-type assignment making both
    sides well-typed with a common type."""
    vs = ineq.variables()
    order = (_L, _B, _Q)
    for combo in itertools.product(order, repeat=len(vs)):
        assign = dict(zip(vs, combo))
        if _possible(ineq.lhs, assign) & _possible(ineq.rhs, assign):
            return assign
    raise ClassifyError("inequality is not typable (no common type)")


# -- signed generation trees --------------------------------------------------


def _signed_nodes(f, sign, ktype_env, path=()):
    """Yield (path, sign, formula node) in the signed generation tree."""
    yield path, sign, f
    if f.is_mvar() or not f.args:
        return
    ins, eps, _ = _head_info(f.head)
    for i, a in enumerate(f.args):
        child_sign = sign if eps[i] == "+" else -sign
        yield from _signed_nodes(a, child_sign, ktype_env, path + (i,))


def _roles(sign, f):
    """Skeleton/PIA roles of a signed non-leaf node.

    Returns a set drawn from {'delta','slr','sra','srr'}; delta/slr are
    Skeleton, sra/srr are PIA."""
    head = f.head
    arity = len(f.args)
    _, _, fam = _head_info(head)
    roles = set()
    if head in LATTICE_HEADS:
        roles.add("delta")
        if (sign > 0 and fam == "F") or (sign < 0 and fam == "G"):
            roles.add("sra")
        if (sign > 0 and fam == "G") or (sign < 0 and fam == "F"):
            roles.add("srr")
        return roles
    if arity >= 1:
        if (sign > 0 and fam == "F") or (sign < 0 and fam == "G"):
            roles.add("slr")
        if arity == 1 and ((sign > 0 and fam == "G") or (sign < 0 and fam == "F")):
            roles.add("sra")
        if arity == 2 and ((sign > 0 and fam == "G") or (sign < 0 and fam == "F")):
            roles.add("srr")
    return roles


def _branches(tree_root, sign0):
    """All variable-ending branches as (var, leaf_sign, trail) where trail is
    a list of (sign, node, child_index_taken) from root to leaf; the leaf
    entry has child index None.  Constant leaves carry no variable and are
    exempt."""
    out = []

    def walk(f, sign, trail):
        if f.is_mvar():
            out.append((f.name, sign, trail + [(sign, f, None)]))
            return
        if not f.args:
            return  # constant leaf: exempt
        _, eps, _ = _head_info(f.head)
        for i, a in enumerate(f.args):
            walk(a, sign if eps[i] == "+" else -sign, trail + [(sign, f, i)])

    walk(tree_root, sign0, [])
    return out


def _branch_good(trail):
    """Good iff the branch splits into Skeleton (root side) then PIA (leaf
    side); the variable leaf itself carries no role."""
    inner = trail[:-1]
    roles = [_roles(s, f) for s, f, _ in inner]
    n = len(roles)
    for k in range(n + 1):
        if all({"delta", "slr"} & r for r in roles[:k]) and all(
            {"sra", "srr"} & r for r in roles[k:]
        ):
            return True
    return False


def _critical(var, sign, eps):
    return (sign > 0 and eps[var] == 1) or (sign < 0 and eps[var] == "d")


def _subtree_agrees_dual(f, sign, eps):
    """Every variable leaf of the signed subtree is critical for the dual
    order type (constants are ignored)."""
    for _, s, node in _signed_nodes(f, sign, None):
        if node.is_mvar():
            dual_ok = (s > 0 and eps[node.name] == "d") or (s < 0 and eps[node.name] == 1)
            if not dual_ok:
                return False
    return True


def classify(ineq):
    """Decide analytic-inductiveness; returns Analytic(eps, omega) or
    NotAnalytic(reason)."""
    if ineq.var_types is None:
        ineq = make_inequality(ineq.lhs, ineq.rhs)
    sides = [(ineq.lhs, +1), (ineq.rhs, -1)]
    all_branches = []
    for root, s0 in sides:
        for var, sign, trail in _branches(root, s0):
            if not _branch_good(trail):
                from . import syntax

                return NotAnalytic(
                    f"branch to {'+' if sign > 0 else '-'}{var} in "
                    f"{'+lhs' if s0 > 0 else '-rhs'} is not good "
                    f"(PIA above Skeleton)"
                )
            all_branches.append((var, sign, trail))

    vs = ineq.variables()
    for combo in itertools.product((1, "d"), repeat=len(vs)):
        eps = dict(zip(vs, combo))
        pairs = set()
        ok = True
        for var, sign, trail in all_branches:
            if not _critical(var, sign, eps):
                continue
            # every SRR node on a critical branch restricts its side subtrees
            for s, f, taken in trail[:-1]:
                if "srr" not in _roles(s, f):
                    continue
                _, eps_h, _ = _head_info(f.head)
                for h, other in enumerate(f.args):
                    if h == taken:
                        continue
                    other_sign = s if eps_h[h] == "+" else -s
                    if not _subtree_agrees_dual(other, other_sign, eps):
                        ok = False
                        break
                    for _, _, node in _signed_nodes(other, other_sign, None):
                        if node.is_mvar():
                            pairs.add((node.name, var))
                if not ok:
                    break
            if not ok:
                break
        if not ok:
            continue
        # pairs must extend to a strict (irreflexive, transitive) order
        closure = set(pairs)
        changed = True
        while changed:
            changed = False
            for a, b in list(closure):
                for c, d in list(closure):
                    if b == c and (a, d) not in closure:
                        closure.add((a, d))
                        changed = True
        if any(a == b for a, b in closure):
            continue
        return Analytic(epsilon=eps, omega=tuple(sorted(closure)))
    return NotAnalytic("no order type satisfies the inductive side conditions")
