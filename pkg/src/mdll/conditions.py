"""Meta-validation of the properness conditions for a calculus definition.

A calculus is a proper multi-type display calculus when every rule passes
the checks below; cut elimination then follows from the meta-theorem,
provided the principal reduction table (the one the cut eliminator uses)
covers every connective.  That last condition is C8 and is reported as
delegated to the reduction table rather than checked here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .terms import Formula, Structure

CHECKED = ("C1", "C2", "C3", "C4", "C5", "C6", "C7", "C9", "C10")
C8_NOTE = "C8 delegated to the cut-elimination reduction table"


@dataclass
class ConditionReport:
    calculus: str
    verdicts: dict = field(default_factory=dict)  # rule -> {cond: 'pass'|'fail: ...'|'n/a'}
    c8_note: str = C8_NOTE

    @property
    def ok(self):
        return not self.failures()

    def failures(self):
        out = []
        for rule, conds in self.verdicts.items():
            for cond, verdict in conds.items():
                if verdict.startswith("fail"):
                    out.append((rule, cond, verdict))
        return out

    def failed_conditions(self, rule):
        return sorted(
            c for c, v in self.verdicts.get(rule, {}).items() if v.startswith("fail")
        )


def _leaf_formulas(seqpat):
    for tag in ("L", "R"):
        for _, node in seqpat.side(tag).nodes():
            if isinstance(node, Structure) and node.is_leaf():
                yield node.formula


def _mvar_signs(seqpat, calc):
    """name -> list of (+1|-1) signs of its occurrences in a pattern sequent."""
    out = {}

    def walk_formula(f, sign):
        if f.is_mvar():
            out.setdefault(f.name, []).append(sign)
            return
        if f.is_atom():
            return
        eps = calc.op_eps(f.head, len(f.args))
        for e, a in zip(eps, f.args):
            walk_formula(a, sign if e == "+" else -sign)

    def walk(s, sign):
        if s.is_mvar():
            out.setdefault(s.name, []).append(sign)
            return
        if s.is_leaf():
            walk_formula(s.formula, sign)
            return
        eps = calc.struct_eps(s.head, len(s.args))
        for e, a in zip(eps, s.args):
            walk(a, sign if e == "+" else -sign)

    walk(seqpat.ant, +1)
    walk(seqpat.suc, -1)
    return out


def _count_mvars(seqpat):
    out = {}

    def bump(name):
        out[name] = out.get(name, 0) + 1

    for tag in ("L", "R"):
        for _, node in seqpat.side(tag).nodes():
            if isinstance(node, Structure):
                if node.is_mvar():
                    bump(node.name)
                elif node.is_leaf():
                    for g in node.formula.subterms():
                        if g.is_mvar():
                            bump(g.name)
    return out


def _nonparametric(rule):
    """Formula metavariables tied to principal constituents: those inside a
    whole-side conclusion formula, and the cut formula of a cut rule."""
    out = set()
    for tag in ("L", "R"):
        side = rule.conclusion.side(tag)
        if isinstance(side, Structure) and side.is_leaf():
            for g in side.formula.subterms():
                if g.is_mvar():
                    out.add(g.name)
    if rule.is_cut:
        out |= {m for m, (kind, _) in rule.metavars.items() if kind != "structure"}
    return out


def _is_subterm(small, big):
    if small == big:
        return True
    if isinstance(big, Formula):
        return any(_is_subterm(small, a) for a in big.args)
    return False


def validate_conditions(calc):
    report = ConditionReport(calculus=calc.name)
    for rule in calc.rules:
        verdicts = {}
        report.verdicts[rule.name] = verdicts
        patterns = rule.premises + (rule.conclusion,)
        mvt = {m: t for m, (_, t) in rule.metavars.items()}

        # C1: premise operational terms are subterms of conclusion ones.
        if rule.is_cut:
            verdicts["C1"] = "n/a (cut rule)"
        else:
            conc_ops = list(_leaf_formulas(rule.conclusion))
            bad = None
            for prem in rule.premises:
                for f in _leaf_formulas(prem):
                    if not any(_is_subterm(f, g) for g in conc_ops):
                        bad = f
                        break
                if bad:
                    break
            verdicts["C1"] = (
                f"fail: premise term {bad!r} not a conclusion subterm" if bad else "pass"
            )

        # C2: congruence is by shared name, so shape-alikeness is structural;
        # type-alikeness holds because each metavariable has one declaration.
        dup = [m for m in rule.metavars if not rule.metavars[m][1]]
        verdicts["C2"] = "pass" if not dup else f"fail: untyped metavariables {dup}"

        principal_mvars = _nonparametric(rule)

        # C3: non-proliferation of parameters in the conclusion.
        counts = _count_mvars(rule.conclusion)
        prolif = sorted(
            m for m, n in counts.items() if n > 1 and m not in principal_mvars
        )
        verdicts["C3"] = (
            f"fail: {prolif} occur more than once in the conclusion" if prolif else "pass"
        )

        # C4: position-alikeness of congruent parameters.
        signs = {}
        try:
            for p in patterns:
                for m, ss in _mvar_signs(p, calc).items():
                    if m not in principal_mvars:
                        signs.setdefault(m, []).extend(ss)
            mixed = sorted(m for m, ss in signs.items() if len(set(ss)) > 1)
            verdicts["C4"] = (
                f"fail: {mixed} occur in both precedent and succedent position"
                if mixed
                else "pass"
            )
        except Exception as e:  # undeclared tonicity
            verdicts["C4"] = f"fail: {e}"

        # C5: principal constituents are in display (a whole side).
        bad5 = []
        for tag in ("L", "R"):
            for path, node in rule.conclusion.side(tag).nodes():
                if (
                    isinstance(node, Structure)
                    and node.is_leaf()
                    and not node.formula.is_mvar()
                    and path != ()
                ):
                    bad5.append(node.formula)
        verdicts["C5"] = (
            f"fail: principal term(s) {bad5} not in display" if bad5 else "pass"
        )

        # C6/C7: parameters are bare metavariables (no restricted contexts).
        # A structure leaf holding a concrete formula with metavariables
        # inside is only allowed as a displayed principal in the conclusion.
        bad67 = []
        for i, p in enumerate(patterns):
            is_conc = i == len(patterns) - 1
            for tag in ("L", "R"):
                side = p.side(tag)
                for path, node in side.nodes():
                    if not (isinstance(node, Structure) and node.is_leaf()):
                        continue
                    f = node.formula
                    if f.is_mvar():
                        continue
                    inner = [g.name for g in f.subterms() if g.is_mvar()]
                    if inner and not (is_conc and path == ()):
                        bad67.extend(inner)
        bad67 = sorted(set(bad67))
        verdicts["C6"] = (
            f"fail: operational parameters in restricted context: {bad67}"
            if bad67
            else "pass"
        )
        verdicts["C7"] = verdicts["C6"]

        # C9 / C10: type-uniformity of patterns; cut rules get C10.
        uniform = all(bool(calc.sequent_types(p, mvt)) for p in patterns)
        if rule.is_cut:
            verdicts["C9"] = "n/a (cut rule; see C10)"
            prem_uniform = all(
                bool(calc.sequent_types(p, mvt)) for p in rule.premises
            )
            conc_uniform = bool(calc.sequent_types(rule.conclusion, mvt))
            verdicts["C10"] = (
                "pass"
                if (not prem_uniform) or conc_uniform
                else "fail: uniform premises, non-uniform conclusion"
            )
        else:
            verdicts["C9"] = (
                "pass" if uniform else "fail: pattern sequent not type-uniform"
            )
            verdicts["C10"] = "n/a"
    return report


