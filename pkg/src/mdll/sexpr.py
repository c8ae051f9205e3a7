"""Minimal s-expression reader/writer.

Everything the engine persists (calculus catalogs, derivations, algebras)
is ASCII s-expressions: nested lists of symbols.  Symbols match
[A-Za-z0-9_.+-]+; whitespace separates, ';' starts a line comment.
"""

from __future__ import annotations

SYMBOL_CHARS = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_.+-")


class SexprError(ValueError):
    """Lexical or structural error, with byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


def tokenize(text):
    """Yield (token, offset) pairs; token is '(' , ')' or a symbol."""
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c in "()":
            yield c, i
            i += 1
        elif c in SYMBOL_CHARS:
            j = i
            while j < n and text[j] in SYMBOL_CHARS:
                j += 1
            yield text[i:j], i
            i = j
        else:
            raise SexprError(f"unexpected character {c!r}", i)


def parse(text):
    """Parse one s-expression; error if trailing junk remains."""
    forms = parse_many(text)
    if len(forms) != 1:
        raise SexprError(f"expected exactly one expression, found {len(forms)}", 0)
    return forms[0]


def parse_many(text):
    """Parse a sequence of top-level s-expressions into Python lists/strings."""
    stack = [[]]
    last = 0
    for tok, off in tokenize(text):
        last = off
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError("unbalanced ')'", off)
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise SexprError("unbalanced '('", last)
    return stack[0]


def dump(form):
    """Render a nested list/str structure back to canonical text."""
    if isinstance(form, str):
        return form
    return "(" + " ".join(dump(x) for x in form) + ")"
