"""Typed operational and structural terms.

A Formula is an operational term: an atom, a metavariable, or a connective
applied to formulas.  A Structure is a structural term whose leaves are
formulas.  Sequents pair two structures.  All values are immutable and
hashable; parsing/printing live in mdll.syntax, typing rules come from the
active calculus definition.

Paths address subterms: a path is a tuple of child indices; sequent-level
paths are ('L', i0, i1, ...) or ('R', ...) selecting the antecedent or
succedent first.  Structure paths pass through leaf nodes into the leaf
formula transparently (the leaf wrapper itself is not addressable).
"""

from __future__ import annotations

from dataclasses import dataclass, field

ATOM = "atom"
MVAR = "mvar"
LEAF = "leaf"

PRECEDENT = "Precedent"
SUCCEDENT = "Succedent"


@dataclass(frozen=True, eq=False)
class Formula:
    head: str
    args: tuple = ()
    name: str = ""  # atom or metavariable name

    def __post_init__(self):
        if self.head in (ATOM, MVAR):
            assert self.name and not self.args
        else:
            assert not self.name
        object.__setattr__(self, "_h", hash(("F", self.head, self.args, self.name)))
        object.__setattr__(self, "_sz", 1 + sum(a._sz for a in self.args))

    def __hash__(self):
        return self._h

    def size(self):
        return self._sz

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Formula)
            and self._h == other._h
            and self.head == other.head
            and self.name == other.name
            and self.args == other.args
        )

    def is_atom(self):
        return self.head == ATOM

    def is_mvar(self):
        return self.head == MVAR

    def subterms(self):
        yield self
        for a in self.args:
            yield from a.subterms()

    def at(self, path):
        node = self
        for i in path:
            node = node.args[i]
        return node

    def __repr__(self):
        from . import syntax

        return f"Formula<{syntax.print_formula(self)}>"


def atom(name):
    return Formula(ATOM, name=name)


def fvar(name):
    return Formula(MVAR, name=name)


@dataclass(frozen=True, eq=False)
class Structure:
    head: str
    args: tuple = ()
    formula: Formula | None = None  # set iff head == LEAF
    name: str = ""  # metavariable name iff head == MVAR

    def __post_init__(self):
        if self.head == LEAF:
            assert self.formula is not None and not self.args
        elif self.head == MVAR:
            assert self.name and not self.args
        object.__setattr__(
            self, "_h", hash(("S", self.head, self.args, self.formula, self.name))
        )
        object.__setattr__(
            self,
            "_sz",
            1
            + sum(a._sz for a in self.args)
            + (self.formula._sz if self.formula is not None else 0),
        )

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Structure)
            and self._h == other._h
            and self.head == other.head
            and self.name == other.name
            and self.formula == other.formula
            and self.args == other.args
        )

    def is_leaf(self):
        return self.head == LEAF

    def is_mvar(self):
        return self.head == MVAR

    def at(self, path):
        """Subterm at path; inside a leaf the path continues into the formula."""
        node = self
        for k, i in enumerate(path):
            if isinstance(node, Structure) and node.is_leaf():
                return node.formula.at(path[k:])
            node = node.args[i]
        if isinstance(node, Structure) and node.is_leaf():
            return node.formula
        return node

    def replace(self, path, new):
        """Return a copy with the subterm at path replaced by `new`.

        `new` may be a Structure or a Formula; a Formula replacing a
        structure position is wrapped as a leaf.
        """
        if not path:
            return leaf(new) if isinstance(new, Formula) else new
        if self.is_leaf():
            return leaf(_freplace(self.formula, path, new))
        i = path[0]
        args = list(self.args)
        args[i] = args[i].replace(path[1:], new)
        return Structure(self.head, tuple(args))

    def nodes(self):
        """Yield (path, node) for every structure node and formula subterm."""
        yield (), self
        if self.is_leaf():
            for p, f in _fnodes(self.formula):
                if p:
                    yield p, f
        else:
            for i, a in enumerate(self.args):
                for p, node in a.nodes():
                    yield (i,) + p, node

    def leaf_formulas(self):
        if self.is_leaf():
            yield self.formula
        else:
            for a in self.args:
                yield from a.leaf_formulas()

    def size(self):
        return self._sz

    def __repr__(self):
        from . import syntax

        return f"Structure<{syntax.print_structure(self)}>"


def _fnodes(f):
    yield (), f
    for i, a in enumerate(f.args):
        for p, node in _fnodes(a):
            yield (i,) + p, node


def _freplace(f, path, new):
    if not path:
        assert isinstance(new, Formula)
        return new
    args = list(f.args)
    args[path[0]] = _freplace(args[path[0]], path[1:], new)
    return Formula(f.head, tuple(args))


def leaf(f):
    return Structure(LEAF, formula=f)


def svar(name):
    return Structure(MVAR, name=name)


@dataclass(frozen=True, eq=False)
class Sequent:
    ant: Structure
    suc: Structure

    def __post_init__(self):
        object.__setattr__(self, "_h", hash(("Q", self.ant, self.suc)))
        object.__setattr__(self, "_sz", self.ant._sz + self.suc._sz)

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, Sequent)
            and self._h == other._h
            and self.ant == other.ant
            and self.suc == other.suc
        )

    def size(self):
        return self._sz

    def side(self, tag):
        return self.ant if tag == "L" else self.suc

    def with_side(self, tag, s):
        return Sequent(s, self.suc) if tag == "L" else Sequent(self.ant, s)

    def at(self, path):
        return self.side(path[0]).at(tuple(path[1:]))

    def replace(self, path, new):
        return self.with_side(path[0], self.side(path[0]).replace(tuple(path[1:]), new))

    def paths(self):
        """All structure-node paths of both sides (not descending into formulas)."""
        for tag in ("L", "R"):
            for p, node in self.side(tag).nodes():
                if isinstance(node, Structure):
                    yield (tag,) + p

    def __repr__(self):
        from . import syntax

        return f"Sequent<{syntax.print_sequent(self)}>"


def subformulas(f):
    """Reflexive-transitive subterm closure of a formula."""
    return set(f.subterms())


def parse_path(text):
    """Parse "L.0.1" into ('L', 0, 1)."""
    parts = text.split(".")
    if not parts or parts[0] not in ("L", "R"):
        raise ValueError(f"path must start with L or R: {text!r}")
    return (parts[0],) + tuple(int(p) for p in parts[1:])


def format_path(path):
    return ".".join(str(p) for p in path)
