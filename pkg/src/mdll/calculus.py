"""Calculus definitions: connective signatures, rule schemas, packs.

Calculi are loaded from s-expression catalog files shipped under
mdll/data (dll.cal, dfl.cal).  A catalog declares types, connective
signatures (operational and structural, possibly overloaded by type) and
rules grouped into named packs.  See data/connectives.md for the full
head-name table.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import lru_cache

from . import sexpr
from .terms import ATOM, LEAF, MVAR, Formula, Sequent, Structure, fvar, leaf, svar

DATA_DIR = os.path.join(os.path.dirname(__file__), "data")

PACK_ALIASES = {
    "core-ILL": "core",
    "classical-Grishin": "classical",
    "negation-primitive": "negation",
    "classical-negation": "classneg",
    "flat-FL": "core",
}

# Packs that only make sense on top of another pack's signature.
PACK_REQUIRES = {
    "classneg": frozenset({"negation"}),
    "swap": frozenset({"negation"}),
}


class CalculusError(ValueError):
    pass


@dataclass(frozen=True)
class ConnectiveSig:
    name: str
    arity: int
    input_types: tuple
    output_type: str
    eps: tuple  # '+' / '-' per coordinate
    family: str = ""  # 'F', 'G' or '' (structural / unclassified)
    structural: str = ""  # structural counterpart of an operational head
    operational: bool = True  # False for structural-only connectives
    pack: str = "core"


@dataclass(frozen=True)
class RuleSchema:
    name: str
    metavars: dict  # name -> (kind, type); kind in {'structure','formula','atom'}
    premises: tuple  # Sequent patterns
    conclusion: Sequent
    bidirectional: bool = False
    is_cut: bool = False
    is_display: bool = False
    pack: str = "core"

    def principal_paths(self):
        """Conclusion occurrences introduced by the rule: a whole side that is
        a formula leaf with a concrete head."""
        out = []
        for tag in ("L", "R"):
            side = self.conclusion.side(tag)
            if side.is_leaf() and not side.formula.is_mvar():
                out.append((tag,))
        return out


@dataclass(frozen=True)
class Inference:
    """One directed reading of a rule: match `goal`, emit `subgoals`."""

    name: str
    schema: RuleSchema
    goal: Sequent
    subgoals: tuple
    direction: str  # 'dn' | 'up' | ''


@dataclass
class CalculusDef:
    name: str
    types: tuple
    atom_types: frozenset
    op_sigs: dict  # head -> [ConnectiveSig]
    struct_sigs: dict
    rules: list  # [RuleSchema]
    packs: frozenset
    available_packs: frozenset

    def rule(self, name):
        for r in self.rules:
            if r.name == name:
                return r
        raise CalculusError(f"unknown rule {name!r}")

    def has_rule(self, name):
        return any(r.name == name for r in self.rules)

    @property
    def inferences(self):
        # For a double-line figure TOP / BOTTOM, NAME.up concludes BOTTOM from
        # TOP (reading the figure downward as printed) and NAME.dn concludes
        # TOP from BOTTOM.
        if not hasattr(self, "_inferences"):
            table = {}
            for r in self.rules:
                if r.bidirectional:
                    table[r.name + ".dn"] = Inference(
                        r.name + ".dn", r, r.premises[0], (r.conclusion,), "dn"
                    )
                    table[r.name + ".up"] = Inference(
                        r.name + ".up", r, r.conclusion, r.premises, "up"
                    )
                else:
                    table[r.name] = Inference(r.name, r, r.conclusion, r.premises, "")
            self._inferences = table
        return self._inferences

    def inference(self, name):
        try:
            return self.inferences[name]
        except KeyError:
            raise CalculusError(f"unknown inference {name!r}") from None

    def inferences_for(self, rule_name):
        """All directed readings a derivation node named `rule_name` may use."""
        if rule_name in self.inferences:
            return [self.inferences[rule_name]]
        out = [
            inf
            for n, inf in self.inferences.items()
            if n.split(".")[0] == rule_name
        ]
        if not out:
            raise CalculusError(f"unknown rule {rule_name!r}")
        return out

    # -- typing ---------------------------------------------------------

    def formula_types(self, f, mvar_types=None):
        """Set of possible type tags of a formula (empty = ill-typed)."""
        if f.is_mvar():
            t = (mvar_types or {}).get(f.name)
            return frozenset({t}) if t else frozenset(self.types)
        if mvar_types is None:
            if not hasattr(self, "_ftype_cache"):
                self._ftype_cache = {}
            hit = self._ftype_cache.get(f)
            if hit is not None:
                return hit
        if f.is_atom():
            out = self.atom_types
        else:
            sigs = self.op_sigs.get(f.head)
            if not sigs:
                out = frozenset()
            else:
                child = [self.formula_types(a, mvar_types) for a in f.args]
                out = frozenset(
                    sig.output_type
                    for sig in sigs
                    if sig.arity == len(f.args)
                    and all(sig.input_types[i] in child[i] for i in range(sig.arity))
                )
        if mvar_types is None:
            self._ftype_cache[f] = out
        return out

    def structure_types(self, s, mvar_types=None):
        if s.is_mvar():
            t = (mvar_types or {}).get(s.name)
            return frozenset({t}) if t else frozenset(self.types)
        if s.is_leaf():
            return self.formula_types(s.formula, mvar_types)
        if mvar_types is None:
            if not hasattr(self, "_stype_cache"):
                self._stype_cache = {}
            hit = self._stype_cache.get(s)
            if hit is not None:
                return hit
        sigs = self.struct_sigs.get(s.head)
        if not sigs:
            out = frozenset()
        else:
            child = [self.structure_types(a, mvar_types) for a in s.args]
            out = frozenset(
                sig.output_type
                for sig in sigs
                if sig.arity == len(s.args)
                and all(sig.input_types[i] in child[i] for i in range(sig.arity))
            )
        if mvar_types is None:
            self._stype_cache[s] = out
        return out

    def sequent_types(self, seq, mvar_types=None):
        """Types witnessing C9 (type-uniformity) for this sequent."""
        return self.structure_types(seq.ant, mvar_types) & self.structure_types(
            seq.suc, mvar_types
        )

    def check_sequent(self, seq, mvar_types=None):
        if not self.sequent_types(seq, mvar_types):
            from . import syntax

            raise CalculusError(
                f"sequent is not type-uniform: {syntax.print_sequent(seq)}"
            )

    # -- tonicity / position --------------------------------------------

    def struct_eps(self, head, arity):
        sigs = self.struct_sigs.get(head)
        if sigs:
            for sig in sigs:
                if sig.arity == arity:
                    return sig.eps
        raise CalculusError(f"unknown structural head {head!r}/{arity}")

    def op_eps(self, head, arity):
        sigs = self.op_sigs.get(head)
        if sigs:
            for sig in sigs:
                if sig.arity == arity:
                    return sig.eps
        raise CalculusError(f"unknown operational head {head!r}/{arity}")


# ---------------------------------------------------------------------------
# catalog parsing


def _parse_formula_pattern(form, metavars):
    if isinstance(form, str):
        if form in metavars:
            kind = metavars[form][0]
            if kind not in ("formula", "atom"):
                raise CalculusError(f"metavariable {form} is not a formula kind")
            return fvar(form)
        raise CalculusError(f"undeclared symbol {form!r} in formula pattern")
    head = form[0]
    if head == ATOM:
        return Formula(ATOM, name=form[1])
    return Formula(head, tuple(_parse_formula_pattern(a, metavars) for a in form[1:]))


def _parse_structure_pattern(form, metavars, calc_heads):
    if isinstance(form, str):
        kind = metavars.get(form, (None,))[0]
        if kind == "structure":
            return svar(form)
        if kind in ("formula", "atom"):
            return leaf(fvar(form))
        raise CalculusError(f"undeclared symbol {form!r} in pattern")
    head = form[0]
    if head in calc_heads["struct"]:
        return Structure(
            head, tuple(_parse_structure_pattern(a, metavars, calc_heads) for a in form[1:])
        )
    return leaf(_parse_formula_pattern(form, metavars))


def _parse_rule(form, pack, calc_heads):
    it = iter(form[1:])
    name = next(it)
    flags = set()
    metavars = {}
    premises = []
    conclusion = None
    for item in it:
        if isinstance(item, str):
            flags.add(item)
            continue
        tag = item[0]
        if tag == "meta":
            for decl in item[1:]:
                mname, kind, mtype = decl
                metavars[mname] = (kind, mtype)
        elif tag == "prem":
            for s in item[1:]:
                premises.append(_parse_seq_pattern(s, metavars, calc_heads))
        elif tag == "conc":
            conclusion = _parse_seq_pattern(item[1], metavars, calc_heads)
        else:
            raise CalculusError(f"bad rule clause {tag!r} in {name}")
    if conclusion is None:
        raise CalculusError(f"rule {name} has no conclusion")
    return RuleSchema(
        name=name,
        metavars=metavars,
        premises=tuple(premises),
        conclusion=conclusion,
        bidirectional="bidir" in flags,
        is_cut="cut" in flags,
        is_display="display" in flags,
        pack=pack,
    )


def _parse_seq_pattern(form, metavars, calc_heads):
    if form[0] != "seq" or len(form) != 3:
        raise CalculusError(f"bad sequent pattern {sexpr.dump(form)}")
    return Sequent(
        _parse_structure_pattern(form[1], metavars, calc_heads),
        _parse_structure_pattern(form[2], metavars, calc_heads),
    )


def _parse_sig(form, kind, pack):
    # (op NAME (IN...) OUT (eps ...) (family F) (struct sX)) / (struct NAME (IN...) OUT (eps ...))
    name = form[1]
    input_types = tuple(form[2])
    output = form[3]
    eps = ()
    family = ""
    structural = ""
    for extra in form[4:]:
        if extra[0] == "eps":
            eps = tuple(extra[1:])
        elif extra[0] == "family":
            family = extra[1]
        elif extra[0] == "struct":
            structural = extra[1]
        else:
            raise CalculusError(f"bad signature clause {extra[0]!r}")
    if not eps:
        eps = tuple("+" for _ in input_types)
    if len(eps) != len(input_types):
        raise CalculusError(f"eps arity mismatch for {name}")
    return ConnectiveSig(
        name=name,
        arity=len(input_types),
        input_types=input_types,
        output_type=output,
        eps=eps,
        family=family,
        structural=structural,
        operational=(kind == "op"),
        pack=pack,
    )


@lru_cache(maxsize=None)
def _load_catalog(calc_name):
    path = os.path.join(DATA_DIR, calc_name + ".cal")
    if not os.path.exists(path):
        raise CalculusError(f"unknown calculus {calc_name!r}")
    with open(path, encoding="ascii") as fh:
        form = sexpr.parse(fh.read())
    if form[0] != "calculus" or form[1] != calc_name:
        raise CalculusError(f"catalog {path} does not define {calc_name}")
    types = ()
    atom_types = frozenset()
    sig_decls = []  # (pack, kind, form)
    rule_decls = []  # (pack, form)
    pack_names = {"core"}
    for item in form[2:]:
        tag = item[0]
        if tag == "types":
            types = tuple(item[1:])
        elif tag == "atoms":
            atom_types = frozenset(item[1:])
        elif tag in ("op", "struct"):
            sig_decls.append(("core", tag, item))
        elif tag == "pack":
            pname = item[1]
            pack_names.add(pname)
            for sub in item[2:]:
                if sub[0] in ("op", "struct"):
                    sig_decls.append((pname, sub[0], sub))
                elif sub[0] == "rule":
                    rule_decls.append((pname, sub))
                else:
                    raise CalculusError(f"bad pack clause {sub[0]!r}")
        else:
            raise CalculusError(f"bad catalog clause {tag!r}")
    return types, atom_types, tuple(sig_decls), tuple(rule_decls), frozenset(pack_names)


def load_calculus(name, packs=("core",)):
    """Build the calculus `name` ('dll' or 'dfl') with the given packs active.

    The core pack is always included.  Pack aliases from the project docs
    (core-ILL, negation-primitive, ...) are accepted.
    """
    requested = {PACK_ALIASES.get(p, p) for p in packs} | {"core"}
    types, atom_types, sig_decls, rule_decls, available = _load_catalog(name)
    unknown = requested - available
    if unknown:
        raise CalculusError(f"unknown pack(s) for {name}: {sorted(unknown)}")
    active = set(requested)
    changed = True
    while changed:
        changed = False
        for p in list(active):
            need = PACK_REQUIRES.get(p, frozenset()) - active
            if need:
                active |= need
                changed = True

    op_sigs, struct_sigs = {}, {}
    for pack, kind, form in sig_decls:
        if pack not in active:
            continue
        sig = _parse_sig(form, kind, pack)
        target = op_sigs if kind == "op" else struct_sigs
        target.setdefault(sig.name, []).append(sig)

    calc_heads = {"struct": set(struct_sigs), "op": set(op_sigs)}
    rules = []
    for pack, form in rule_decls:
        if pack not in active:
            continue
        rules.append(_parse_rule(form, pack, calc_heads))
    names = [r.name for r in rules]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise CalculusError(f"duplicate rule names: {dupes}")

    calc = CalculusDef(
        name=name,
        types=types,
        atom_types=atom_types,
        op_sigs=op_sigs,
        struct_sigs=struct_sigs,
        rules=rules,
        packs=frozenset(active),
        available_packs=available,
    )
    _validate_wellformed(calc)
    return calc


def _validate_wellformed(calc):
    """Every head used by a rule must be declared.

    Pattern type-uniformity is deliberately not enforced here: it is the
    business of the conditions meta-validator (C9/C10), which must be able to
    report violations in deliberately broken rule sets."""
    for r in calc.rules:
        for seqp in r.premises + (r.conclusion,):
            for tag in ("L", "R"):
                _check_pattern_heads(calc, seqp.side(tag), r)


def _check_pattern_heads(calc, s, rule):
    for _, node in s.nodes():
        if isinstance(node, Structure):
            if not (node.is_leaf() or node.is_mvar()) and node.head not in calc.struct_sigs:
                raise CalculusError(f"rule {rule.name}: undeclared head {node.head!r}")
        elif isinstance(node, Formula):
            if not (node.is_atom() or node.is_mvar()) and node.head not in calc.op_sigs:
                raise CalculusError(f"rule {rule.name}: undeclared head {node.head!r}")
