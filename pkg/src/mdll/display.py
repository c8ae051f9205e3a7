"""The display property, mechanized.

`display` isolates the substructure at a path on one side of the turnstile
using only invertible structural moves (display postulates plus the
self-inverse exchange rules).  The resulting trace replays forward
(start -> end) and backward, and converts to a checkable derivation.

`normalize_display` computes a deterministic representative of a sequent's
display-equivalence class by unfolding the succedent while it strictly
shrinks; proof search keys its memo tables on it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .calculus import CalculusError
from .derivation import Derivation, _locate_in_pattern, _mvar_positions, match_sequent, subst_sequent
from .terms import PRECEDENT, SUCCEDENT, Sequent
from . import syntax


class DisplayError(ValueError):
    def __init__(self, message, stuck=None):
        super().__init__(message)
        self.stuck = stuck


@dataclass(frozen=True)
class DisplayTrace:
    start: Sequent
    steps: tuple  # directed inference names, in replay order (start -> end)
    end: Sequent

    def replay(self, calc):
        cur = self.start
        for name in self.steps:
            cur = apply_forward(calc.inference(name), cur, calc)
            if cur is None:
                raise DisplayError(f"trace does not replay at {name}")
        return cur

    def replay_back(self, calc):
        cur = self.end
        for name in reversed(self.steps):
            cur = apply_forward(_inverse_name(calc, name), cur, calc)
            if cur is None:
                raise DisplayError("trace does not replay backwards")
        return cur

    def as_derivation(self, top, calc):
        """Graft a derivation of `end` on top and derive `start` below it.

        Each replay step start->end reads bottom-up, so the derivation applies
        the inverse inferences top-down."""
        assert top.conclusion == self.end, "trace expects a derivation of its end sequent"
        d = top
        cur = self.end
        for name in reversed(self.steps):
            inv = _inverse_name(calc, name)
            nxt = apply_forward(inv, cur, calc)
            d = Derivation(inv.name, nxt, (d,))
            cur = nxt
        assert cur == self.start
        return d


def _inverse_name(calc, name):
    if isinstance(name, str):
        inf = calc.inference(name)
    else:
        inf = name
    if inf.direction == "dn":
        return calc.inference(inf.schema.name + ".up")
    if inf.direction == "up":
        return calc.inference(inf.schema.name + ".dn")
    return inf  # self-inverse (exchange, Galois)


def apply_forward(inf, seq, calc):
    """Apply a single-premise directed inference with `seq` as the premise."""
    if len(inf.subgoals) != 1:
        return None
    subst = match_sequent(inf.subgoals[0], seq, {}, inf.schema, calc)
    if subst is None:
        return None
    try:
        return subst_sequent(inf.goal, subst)
    except KeyError:
        return None


def _display_moves(calc):
    """Directed inferences usable as display moves: display postulates in both
    directions plus the (self-inverse) exchange rules."""
    if not hasattr(calc, "_display_moves"):
        names = []
        for r in calc.rules:
            if r.is_display:
                names.extend([r.name + ".dn", r.name + ".up"] if r.bidirectional else [r.name])
            elif r.name.startswith("E_"):
                names.append(r.name)
        calc._display_moves = tuple(calc.inference(n) for n in names)
    return calc._display_moves


def _track(inf, seq, path, calc):
    """Apply inf forward and map the target path into the result.

    Returns (next_sequent, next_path) or None."""
    subst = match_sequent(inf.subgoals[0], seq, {}, inf.schema, calc)
    if subst is None:
        return None
    placed = _locate_in_pattern(inf.subgoals[0], path)
    if placed[0] == "fixed":
        return None
    _, name, _, rem = placed
    positions = _mvar_positions(inf.goal).get(name)
    if not positions or len(positions) != 1:
        return None
    try:
        nxt = subst_sequent(inf.goal, subst)
    except KeyError:
        return None
    return nxt, positions[0] + rem


def display(seq, path, calc):
    """Display the substructure at `path`: a trace ending in Z |- Y' if the
    occurrence is in precedent position, X' |- Z otherwise."""
    path = tuple(path)
    seq.at(path)  # validate
    moves = _display_moves(calc)
    steps = []
    cur, p = seq, path
    while len(p) > 1:
        # BFS for the shortest move sequence that strictly shortens the path.
        seen = {(cur, p)}
        queue = deque([(cur, p, ())])
        found = None
        while queue:
            c, q, trail = queue.popleft()
            if len(q) < len(p):
                found = (c, q, trail)
                break
            if len(trail) > 4:
                continue
            for inf in moves:
                r = _track(inf, c, q, calc)
                if r is None:
                    continue
                nc, nq = r
                if (nc, nq) in seen:
                    continue
                seen.add((nc, nq))
                queue.append((nc, nq, trail + (inf.name,)))
        if found is None:
            raise DisplayError(
                f"no display postulate applies toward {syntax.print_sequent(cur)} "
                f"at {'.'.join(map(str, p))}",
                stuck=cur,
            )
        cur, p, trail = found
        steps.extend(trail)
    want = syntax.position_of(seq, path, calc)
    landed = PRECEDENT if p == ("L",) else SUCCEDENT
    if landed != want:
        raise DisplayError(
            f"displayed occurrence landed {landed}, but its position is {want}"
        )
    return DisplayTrace(seq, tuple(steps), cur)


def normalize_display(seq, calc):
    """Deterministic representative of the display-equivalence class: unfold
    the succedent while some display move strictly shrinks it."""
    moves = _display_moves(calc)
    cur = seq
    while True:
        best = None
        for inf in moves:
            nxt = apply_forward(inf, cur, calc)
            if nxt is not None and nxt.suc.size() < cur.suc.size():
                best = nxt
                break
        if best is None:
            return cur
        cur = best
