"""Concrete s-expression syntax for formulas, structures and sequents,
plus the sign/position computation used by the display engine and the
condition validator.

The printer emits the canonical fully-parenthesised form; parse o print
is the identity on well-typed trees.  `(bang A)` and `(quest A)` are
accepted as input sugar for the defined exponentials and unfold on parse;
print_formula(f, fold=True) re-folds them.
"""

from __future__ import annotations

from . import sexpr
from .calculus import CalculusError
from .terms import (
    ATOM,
    LEAF,
    MVAR,
    PRECEDENT,
    SUCCEDENT,
    Formula,
    Sequent,
    Structure,
    atom,
    leaf,
)


class ParseError(ValueError):
    def __init__(self, message, offset=0):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


_FOLDS = {"bang": ("dia", "bsq"), "quest": ("box", "bdia")}


def _offset_of(form, offsets):
    return offsets.get(id(form), 0)


def _read(text):
    """Parse raw text to nested lists, remembering offsets for error reports."""
    offsets = {}

    toks = list(sexpr.tokenize(text))
    pos = 0

    def parse_one():
        nonlocal pos
        if pos >= len(toks):
            raise ParseError("unexpected end of input", len(text))
        tok, off = toks[pos]
        pos += 1
        if tok == "(":
            items = []
            start = off
            while True:
                if pos >= len(toks):
                    raise ParseError("unbalanced '('", start)
                if toks[pos][0] == ")":
                    pos += 1
                    break
                items.append(parse_one())
            offsets[id(items)] = start
            return items
        if tok == ")":
            raise ParseError("unbalanced ')'", off)
        offsets[id(tok)] = off
        # strings are interned per occurrence via a wrapper list? keep simple:
        return _Sym(tok, off)

    out = parse_one()
    if pos != len(toks):
        raise ParseError("trailing input", toks[pos][1])
    return out


class _Sym(str):
    def __new__(cls, value, off):
        obj = super().__new__(cls, value)
        obj.off = off
        return obj


def _off(form):
    if isinstance(form, _Sym):
        return form.off
    for x in form:
        return _off(x)
    return 0


def _build_formula(form, calc):
    if isinstance(form, str):
        raise ParseError(f"bare symbol {form!r}; atoms are written (atom {form})", _off(form))
    if not form:
        raise ParseError("empty form", 0)
    head = str(form[0])
    if head == ATOM:
        if len(form) != 2 or not isinstance(form[1], str):
            raise ParseError("atom takes one name", _off(form))
        name = str(form[1])
        if not (name[0].isalpha() and all(c.isalnum() or c == "_" for c in name)):
            raise ParseError(f"bad atom name {name!r}", _off(form))
        return atom(name)
    if head in _FOLDS:
        if len(form) != 2:
            raise ParseError(f"{head} takes one argument", _off(form))
        outer, inner = _FOLDS[head]
        return Formula((outer), (Formula(inner, (_build_formula(form[1], calc),)),))
    sigs = calc.op_sigs.get(head)
    if not sigs:
        raise ParseError(f"unknown operational head {head!r}", _off(form))
    arity = sigs[0].arity
    if len(form) - 1 != arity:
        raise ParseError(
            f"{head} takes {arity} argument(s), got {len(form) - 1}", _off(form)
        )
    return Formula(head, tuple(_build_formula(a, calc) for a in form[1:]))


def _build_structure(form, calc):
    if isinstance(form, str):
        raise ParseError(f"bare symbol {form!r} in structure", _off(form))
    head = str(form[0])
    if head in calc.struct_sigs:
        sigs = calc.struct_sigs[head]
        arity = sigs[0].arity
        if len(form) - 1 != arity:
            raise ParseError(
                f"{head} takes {arity} argument(s), got {len(form) - 1}", _off(form)
            )
        return Structure(head, tuple(_build_structure(a, calc) for a in form[1:]))
    return leaf(_build_formula(form, calc))


def parse_formula(text, calc):
    form = _read(text)
    f = _build_formula(form, calc)
    if not calc.formula_types(f):
        raise ParseError(f"ill-typed formula: {print_formula(f)}", _off(form))
    return f


def parse_structure(text, calc):
    form = _read(text)
    s = _build_structure(form, calc)
    if not calc.structure_types(s):
        raise ParseError(f"ill-typed structure: {print_structure(s)}", _off(form))
    return s


def parse_sequent(text, calc):
    form = _read(text)
    seq = build_sequent(form, calc)
    return seq


def build_sequent(form, calc):
    if isinstance(form, str) or len(form) != 3 or str(form[0]) != "seq":
        raise ParseError("expected (seq ANT SUC)", _off(form))
    ant = _build_structure(form[1], calc)
    suc = _build_structure(form[2], calc)
    if not calc.structure_types(ant):
        raise ParseError(f"ill-typed antecedent: {print_structure(ant)}", _off(form[1]))
    if not calc.structure_types(suc):
        raise ParseError(f"ill-typed succedent: {print_structure(suc)}", _off(form[2]))
    seq = Sequent(ant, suc)
    if not calc.sequent_types(seq):
        raise ParseError("type-uniformity violation (C9): antecedent and succedent "
                         "admit no common type", _off(form))
    return seq


# -- printing ---------------------------------------------------------------


def print_formula(f, fold=False):
    if f.is_atom():
        return f"(atom {f.name})"
    if f.is_mvar():
        return f.name
    if fold:
        for sugar, (outer, inner) in _FOLDS.items():
            if f.head == outer and len(f.args) == 1 and f.args[0].head == inner:
                return f"({sugar} {print_formula(f.args[0].args[0], fold=True)})"
    if not f.args:
        return f"({f.head})"
    return "(" + " ".join([f.head] + [print_formula(a, fold=fold) for a in f.args]) + ")"


def print_structure(s, fold=False):
    if s.is_leaf():
        return print_formula(s.formula, fold=fold)
    if s.is_mvar():
        return s.name
    if not s.args:
        return f"({s.head})"
    return "(" + " ".join([s.head] + [print_structure(a, fold=fold) for a in s.args]) + ")"


def print_sequent(seq, fold=False):
    return f"(seq {print_structure(seq.ant, fold=fold)} {print_structure(seq.suc, fold=fold)})"


# -- position / polarity ----------------------------------------------------


def position_of(seq, path, calc):
    """Sign-propagated position of the subterm at `path` ('L'/'R' prefixed).

    The antecedent root is positive (precedent), the succedent root negative;
    each antitone coordinate of a traversed connective flips the sign.
    """
    if not path or path[0] not in ("L", "R"):
        raise ValueError(f"path must start with 'L' or 'R': {path!r}")
    sign = +1 if path[0] == "L" else -1
    node = seq.side(path[0])
    for i in path[1:]:
        if isinstance(node, Structure) and node.is_leaf():
            node = node.formula
        if isinstance(node, Structure):
            eps = calc.struct_eps(node.head, len(node.args))
        elif isinstance(node, Formula) and not (node.is_atom() or node.is_mvar()):
            eps = calc.op_eps(node.head, len(node.args))
        else:
            raise ValueError(f"invalid path {path!r}: no child {i}")
        if i >= len(node.args):
            raise ValueError(f"invalid path {path!r}: no child {i}")
        if eps[i] == "-":
            sign = -sign
        node = node.args[i]
    return PRECEDENT if sign > 0 else SUCCEDENT
