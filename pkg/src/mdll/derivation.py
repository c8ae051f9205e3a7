"""Derivation trees, rule matching/instantiation, the proof checker, and
parameter tracing/substitution.

Matching is plain first-order tree matching: structural connectives are
binary/nullary node constructors, so associativity and exchange only enter
a proof through explicit rule applications.  A derivation node names the
rule it applies; bidirectional rules are addressed as NAME.dn / NAME.up,
and a bare NAME lets the checker try both directions.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import sexpr
from .calculus import CalculusDef, CalculusError
from .terms import ATOM, LEAF, MVAR, Formula, Sequent, Structure, leaf


class CheckError(ValueError):
    def __init__(self, path, reason):
        super().__init__(f"at node {'.'.join(map(str, path)) or '<root>'}: {reason}")
        self.path = path
        self.reason = reason


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Sequent
    premises: tuple = ()

    def node(self, path):
        n = self
        for i in path:
            n = n.premises[i]
        return n

    def nodes(self):
        yield (), self
        for i, p in enumerate(self.premises):
            for q, n in p.nodes():
                yield (i,) + q, n

    def size(self):
        return sum(1 for _ in self.nodes())

    def rules_used(self):
        return {n.rule for _, n in self.nodes()}

    def __repr__(self):
        from . import syntax

        return f"Derivation<{self.rule}: {syntax.print_sequent(self.conclusion)}>"


# -- substitution and matching -----------------------------------------------


def subst_structure(pattern, subst):
    if pattern.is_mvar():
        v = subst[pattern.name]
        return leaf(v) if isinstance(v, Formula) else v
    if pattern.is_leaf():
        return leaf(subst_formula(pattern.formula, subst))
    return Structure(pattern.head, tuple(subst_structure(a, subst) for a in pattern.args))


def subst_formula(pattern, subst):
    if pattern.is_mvar():
        v = subst[pattern.name]
        assert isinstance(v, Formula)
        return v
    if pattern.is_atom():
        return pattern
    return Formula(pattern.head, tuple(subst_formula(a, subst) for a in pattern.args))


def subst_sequent(pattern, subst):
    return Sequent(subst_structure(pattern.ant, subst), subst_structure(pattern.suc, subst))


def _bind(subst, schema, calc, name, value):
    kind, mtype = schema.metavars[name]
    if name in subst:
        return None if subst[name] != value else subst
    if kind == "structure":
        if not isinstance(value, Structure):
            return None
        if mtype not in calc.structure_types(value):
            return None
    else:
        if isinstance(value, Structure):
            if not value.is_leaf():
                return None
            value = value.formula
        if kind == "atom" and not value.is_atom():
            return None
        if mtype not in calc.formula_types(value):
            return None
    out = dict(subst)
    out[name] = value
    return out


def match_structure(pattern, value, subst, schema, calc):
    if pattern.is_mvar():
        return _bind(subst, schema, calc, pattern.name, value)
    if pattern.is_leaf():
        if not (isinstance(value, Structure) and value.is_leaf()):
            return None
        return match_formula(pattern.formula, value.formula, subst, schema, calc)
    if not isinstance(value, Structure) or value.head != pattern.head:
        return None
    if len(value.args) != len(pattern.args):
        return None
    for p, v in zip(pattern.args, value.args):
        subst = match_structure(p, v, subst, schema, calc)
        if subst is None:
            return None
    return subst


def match_formula(pattern, value, subst, schema, calc):
    if pattern.is_mvar():
        return _bind(subst, schema, calc, pattern.name, value)
    if not isinstance(value, Formula) or value.head != pattern.head:
        return None
    if pattern.is_atom():
        return subst if value.name == pattern.name else None
    if len(value.args) != len(pattern.args):
        return None
    for p, v in zip(pattern.args, value.args):
        subst = match_formula(p, v, subst, schema, calc)
        if subst is None:
            return None
    return subst


def match_sequent(pattern, value, subst, schema, calc):
    subst = match_structure(pattern.ant, value.ant, subst, schema, calc)
    if subst is None:
        return None
    return match_structure(pattern.suc, value.suc, subst, schema, calc)


def match_rule(rule, goal, calc):
    """Match a rule conclusion-first against a goal sequent.

    `rule` may be a RuleSchema, a plain rule name, or a directed name such as
    "res_m1.dn".  Returns a list of (substitution, premise sequents), in a
    deterministic order; for rules whose premises mention metavariables absent
    from the conclusion (cuts), those premise slots are None.
    """
    if isinstance(rule, str):
        infs = [calc.inference(rule)] if "." in rule else calc.inferences_for(rule)
    else:
        infs = calc.inferences_for(rule.name)
    out = []
    for inf in infs:
        subst = match_sequent(inf.goal, goal, {}, inf.schema, calc)
        if subst is None:
            continue
        prems = []
        for p in inf.subgoals:
            try:
                prems.append(subst_sequent(p, subst))
            except KeyError:
                prems.append(None)  # not determined by the conclusion
        out.append((subst, prems))
    return out


# -- checking ----------------------------------------------------------------


def check(d, calc):
    """Raise CheckError unless every node arises from its premises by its
    named rule; returns None on success (spec's Ok)."""
    _check_node(d, calc, ())


def check_ok(d, calc):
    try:
        check(d, calc)
        return True
    except CheckError:
        return False


def node_application(d, calc):
    """Resolve the rule application at a node: (inference, substitution).

    Tries every directed reading of the named rule and every match until the
    premises line up."""
    from . import syntax

    last = None
    for inf in calc.inferences_for(d.rule):
        if len(inf.subgoals) != len(d.premises):
            last = f"{inf.name} expects {len(inf.subgoals)} premise(s), node has {len(d.premises)}"
            continue
        subst = match_sequent(inf.goal, d.conclusion, {}, inf.schema, calc)
        if subst is None:
            last = f"conclusion does not match {inf.name}"
            continue
        ok = subst
        for pat, prem in zip(inf.subgoals, d.premises):
            ok = match_sequent(pat, prem.conclusion, ok, inf.schema, calc)
            if ok is None:
                last = (
                    f"premise {syntax.print_sequent(prem.conclusion)} does not fit "
                    f"{inf.name}"
                )
                break
        if ok is not None:
            return inf, ok
    raise CheckError((), last or f"rule {d.rule} does not apply")


def _check_node(d, calc, path):
    if not calc.sequent_types(d.conclusion):
        raise CheckError(path, "conclusion is not type-uniform (C9)")
    try:
        node_application(d, calc)
    except CheckError as e:
        raise CheckError(path, e.reason) from None
    except CalculusError as e:
        raise CheckError(path, str(e)) from None
    for i, p in enumerate(d.premises):
        _check_node(p, calc, path + (i,))


# -- congruence classes of parameters ----------------------------------------


def _mvar_positions(seqpat):
    """Map metavar name -> list of ('L'/'R', ...) paths in a sequent pattern."""
    out = {}
    for tag in ("L", "R"):
        for p, node in seqpat.side(tag).nodes():
            name = None
            if isinstance(node, Structure) and node.is_mvar():
                name = node.name
            elif isinstance(node, Formula) and node.is_mvar():
                name = node.name
            if name:
                out.setdefault(name, []).append((tag,) + p)
    return out


def _locate_in_pattern(seqpat, path):
    """Find which pattern node the concrete path falls under.

    Returns ('mvar', name, mvar_path, remainder) if the path goes through a
    metavariable, ('fixed', node) if it hits rule skeleton."""
    tag = path[0]
    node = seqpat.side(tag)
    walked = (tag,)
    rest = path[1:]
    while True:
        if isinstance(node, Structure) and node.is_mvar():
            return ("mvar", node.name, walked, rest)
        if isinstance(node, Structure) and node.is_leaf():
            node = node.formula
            continue
        if isinstance(node, Formula) and node.is_mvar():
            return ("mvar", node.name, walked, rest)
        if not rest:
            return ("fixed", node)
        i = rest[0]
        if i >= len(node.args):
            return ("fixed", node)  # concrete tree is deeper than skeleton allows
        node = node.args[i]
        walked = walked + (i,)
        rest = rest[1:]


def step_upward(d, calc, occ_paths):
    """One step of congruence tracing at a node.

    occ_paths: paths (in d.conclusion) of the traced congruent occurrences.
    Returns (per_premise_occs, fixed_paths): occurrence paths propagated into
    each premise, and the conclusion paths that hit fixed rule skeleton
    (principal or rule-constant positions)."""
    inf, _ = node_application(d, calc)
    prem_mvars = [_mvar_positions(p) for p in inf.subgoals]
    per_premise = [[] for _ in d.premises]
    fixed = []
    for path in occ_paths:
        placed = _locate_in_pattern(inf.goal, path)
        if placed[0] == "fixed":
            fixed.append(path)
            continue
        _, name, _, rem = placed
        for i, positions in enumerate(prem_mvars):
            for pos in positions.get(name, []):
                per_premise[i].append(pos + rem)
    return per_premise, fixed


def trace_parameter(d, occurrence, calc):
    """Congruence class of an occurrence, upward through the derivation.

    occurrence: (node_path, seq_path).  Returns the set of occurrences
    reachable upward (including the start)."""
    node_path, seq_path = occurrence
    start = d.node(node_path)
    start.conclusion.at(seq_path)  # raises if invalid
    out = set()

    def walk(node, npath, occs):
        for q in occs:
            out.add((npath, q))
        if not node.premises:
            return
        per_premise, _ = step_upward(node, calc, occs)
        for i, sub in enumerate(per_premise):
            if sub:
                walk(node.premises[i], npath + (i,), sub)

    walk(start, node_path, [seq_path])
    return out


def substitute_parameter(d, occurrence, replacement, calc):
    """Replace a parametric occurrence (and its congruence class) by an
    arbitrary structure of matching type; the result passes check."""
    node_path, seq_path = occurrence
    target = d.node(node_path)
    inf, _ = node_application(target, calc)
    placed = _locate_in_pattern(inf.goal, seq_path)
    if placed[0] == "fixed":
        raise CheckError(node_path, "occurrence is principal or rule skeleton; "
                                    "only parameters can be substituted")
    old = target.conclusion.at(seq_path)
    old_types = (
        calc.structure_types(old) if isinstance(old, Structure) else calc.formula_types(old)
    )
    new_types = (
        calc.structure_types(replacement)
        if isinstance(replacement, Structure)
        else calc.formula_types(replacement)
    )
    if not (old_types & new_types):
        raise CheckError(node_path, "replacement type mismatch")

    def rewrite(node, occs):
        new_conc = node.conclusion
        for q in sorted(occs, key=len, reverse=True):
            new_conc = new_conc.replace(q, replacement)
        if not node.premises:
            return Derivation(node.rule, new_conc)
        per_premise, fixed = step_upward(node, calc, occs)
        if fixed:
            raise CheckError((), "congruence class reaches a principal position; "
                                 "cannot substitute")
        prems = tuple(
            rewrite(p, sub) if sub else p
            for p, sub in zip(node.premises, per_premise)
        )
        return Derivation(node.rule, new_conc, prems)

    new_sub = rewrite(target, [seq_path])

    def replace_at(node, path):
        if not path:
            return new_sub
        prems = list(node.premises)
        prems[path[0]] = replace_at(prems[path[0]], path[1:])
        return Derivation(node.rule, node.conclusion, tuple(prems))

    return replace_at(d, node_path)


# -- derivation files ---------------------------------------------------------


def parse_derivation(text, calc):
    form = sexpr.parse(text)
    return build_derivation(form, calc)


def build_derivation(form, calc):
    from . import syntax

    if isinstance(form, str) or len(form) < 3 or str(form[0]) != "drv":
        raise syntax.ParseError("expected (drv RULE (seq ...) CHILD*)")
    rule = str(form[1])
    conclusion = syntax.build_sequent(form[2], calc)
    premises = tuple(build_derivation(f, calc) for f in form[3:])
    return Derivation(rule, conclusion, premises)


def print_derivation(d, indent=0):
    from . import syntax

    pad = "  " * indent
    if not d.premises:
        return f"{pad}(drv {d.rule} {syntax.print_sequent(d.conclusion)})"
    lines = [f"{pad}(drv {d.rule} {syntax.print_sequent(d.conclusion)}"]
    for p in d.premises:
        lines.append(print_derivation(p, indent + 1))
    lines[-1] += ")"
    return "\n".join(lines)
