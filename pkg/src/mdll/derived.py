"""Derived rules: inversion schemas and identity expansion.

Left introductions of join-type (F-family) connectives and right
introductions of meet-type (G-family) connectives are invertible; the
inverses are emitted as derived RuleSchemas, and each instance expands to a
real derivation via identity expansion plus a cut.  Identity expansion
derives a |- a for every formula from the atomic axiom.
"""

from __future__ import annotations

from dataclasses import replace

from .calculus import CalculusError, RuleSchema
from .derivation import Derivation, match_formula, subst_sequent
from .terms import Formula, Sequent, Structure, leaf


def _intro_rules(calc):
    """head -> (left_intro, right_intro) for operational connectives."""
    table = {}
    for r in calc.rules:
        conc = r.conclusion
        for tag, slot in (("L", 0), ("R", 1)):
            side = conc.side(tag)
            if side.is_leaf() and not side.formula.is_mvar() and not side.formula.is_atom():
                head = side.formula.head
                entry = table.setdefault(head, [None, None])
                if entry[slot] is None:
                    entry[slot] = r
    return table


def derived_rules(calc):
    """Inversion rules: premise f(...) |- X gives H(...) |- X for F-family
    heads, and X |- g(...) gives X |- K(...) for G-family heads."""
    out = []
    intro = _intro_rules(calc)
    for head, sigs in sorted(calc.op_sigs.items()):
        fam = sigs[0].family
        if fam not in ("F", "G"):
            continue
        rules = intro.get(head)
        if not rules:
            continue
        base = rules[0] if fam == "F" else rules[1]
        if base is None or len(base.premises) != 1:
            continue
        out.append(
            RuleSchema(
                name="inv_" + base.name,
                metavars=base.metavars,
                premises=(base.conclusion,),
                conclusion=base.premises[0],
                pack="derived",
            )
        )
    return out


def expand_identity(f, calc):
    """Derivation of  f |- f  (all identity sequents are derivable)."""
    if f.is_atom():
        return Derivation("Id", Sequent(leaf(f), leaf(f)))
    intro = _intro_rules(calc)
    if f.head not in intro or None in intro[f.head]:
        raise CalculusError(f"no introduction rules for {f.head!r}")
    left, right = intro[f.head]
    for inner_rule, outer_rule, inner_tag in ((right, left, "R"), (left, right, "L")):
        d = _try_expand(f, inner_rule, outer_rule, inner_tag, calc)
        if d is not None:
            return d
    raise CalculusError(f"cannot expand identity for {f.head!r}")


def _try_expand(f, inner_rule, outer_rule, inner_tag, calc):
    # Instantiate the introduction whose conclusion holds f on `inner_tag`.
    conc_leaf = inner_rule.conclusion.side(inner_tag)
    if not conc_leaf.is_leaf():
        return None
    subst = match_formula(conc_leaf.formula, f, {}, inner_rule, calc)
    if subst is None:
        return None
    prems = []
    for p in inner_rule.premises:
        # each premise pairs one formula metavariable with one structural one
        fm = sm = None
        for tag in ("L", "R"):
            s = p.side(tag)
            if s.is_mvar():
                sm = s.name
            elif s.is_leaf() and s.formula.is_mvar():
                fm = s.formula.name
        if fm is None:
            return None
        if sm is not None:
            subst.setdefault(sm, leaf(subst[fm]))
            if subst[sm] != leaf(subst[fm]):
                return None
        prems.append(expand_identity(subst[fm], calc))
    inner = Derivation(
        inner_rule.name, subst_sequent(inner_rule.conclusion, subst), tuple(prems)
    )
    # Close with the other introduction, binding its context to f itself.
    outer_tag = "R" if inner_tag == "L" else "L"
    oleaf = outer_rule.conclusion.side(outer_tag)
    if not oleaf.is_leaf():
        return None
    osubst = match_formula(oleaf.formula, f, {}, outer_rule, calc)
    if osubst is None or len(outer_rule.premises) != 1:
        return None
    for m, (kind, _) in outer_rule.metavars.items():
        if m not in osubst and kind == "structure":
            osubst[m] = leaf(f)
    try:
        want = subst_sequent(outer_rule.premises[0], osubst)
    except KeyError:
        return None
    if want != inner.conclusion:
        return None
    return Derivation(outer_rule.name, subst_sequent(outer_rule.conclusion, osubst), (inner,))
