"""Finite-depth partial process terms: syntax, structural operational
semantics, characteristic formulas, probes, unfolding of systems into
terms, and exhaustive enumeration.

Terms are hash-consed, so an unfolding of depth ``m`` is a DAG of size
linear in ``m`` times the number of states even though the tree it denotes
is exponential.  The operational semantics keys states by term identity,
which merges equal subterms into one state.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from mtskit._intern import Interned, weak_memo
from mtskit.core import (
    EventAlphabet,
    ModalSystem,
    PointedSystem,
    require_modal,
)
from mtskit.hml import TT, Dia, Formula, Not, box, conj, disj, disj2


class TermError(ValueError):
    pass


class Term(Interned):
    def __str__(self) -> str:
        from mtskit.syntax import print_term

        return print_term(self)

    def __repr__(self) -> str:
        return f"Term({self})"


@dataclass(frozen=True, eq=False, repr=False)
class Nil(Term):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Bot(Term):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class MustPrefix(Term):
    event: str
    body: Term


@dataclass(frozen=True, eq=False, repr=False)
class MayPrefix(Term):
    event: str
    body: Term


@dataclass(frozen=True, eq=False, repr=False)
class Sum(Term):
    left: Term
    right: Term

    def __post_init__(self) -> None:
        for side in (self.left, self.right):
            if isinstance(side, (Nil, Bot)):
                raise TermError(f"{side} cannot be a summand")


NIL = Nil()
BOT = Bot()


def sum_of(summands: Sequence[Term]) -> Term:
    """Left-associated sum; no summands gives ``0``."""
    if not summands:
        return NIL
    result = summands[0]
    for s in summands[1:]:
        result = Sum(result, s)
    return result


def summands(p: Term) -> list[Term]:
    out: list[Term] = []
    stack = [p]
    while stack:
        node = stack.pop()
        if isinstance(node, Sum):
            stack.append(node.right)
            stack.append(node.left)
        else:
            out.append(node)
    return out


@weak_memo
def term_modal_depth(p: Term) -> int:
    match p:
        case Nil() | Bot():
            return 0
        case MustPrefix(_, body) | MayPrefix(_, body):
            return 1 + term_modal_depth(body)
        case Sum():
            return max(term_modal_depth(s) for s in summands(p))
    raise TypeError(f"not a term: {p!r}")


@weak_memo
def term_size(p: Term) -> int:
    """Number of constructors in the term read as a tree."""
    match p:
        case Nil() | Bot():
            return 1
        case MustPrefix(_, body) | MayPrefix(_, body):
            return 1 + term_size(body)
        case Sum(left, right):
            return 1 + term_size(left) + term_size(right)
    raise TypeError(f"not a term: {p!r}")


def term_events(p: Term) -> set[str]:
    seen: set[Term] = set()
    events: set[str] = set()
    stack = [p]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        match node:
            case MustPrefix(e, body) | MayPrefix(e, body):
                events.add(e)
                stack.append(body)
            case Sum(left, right):
                stack.extend((left, right))
    return events


@weak_memo
def contains_partiality(p: Term) -> bool:
    """True if ``p`` contains ``bot`` or a may-prefix."""
    match p:
        case Bot() | MayPrefix():
            return True
        case Nil():
            return False
        case MustPrefix(_, body):
            return contains_partiality(body)
        case Sum(left, right):
            return contains_partiality(left) or contains_partiality(right)
    raise TypeError(f"not a term: {p!r}")


def _require_events(p: Term, alphabet: EventAlphabet) -> None:
    unknown = sorted(e for e in term_events(p) if e not in alphabet)
    if unknown:
        raise TermError(f"term uses events outside the alphabet: {', '.join(unknown)}")


# operational semantics ---------------------------------------------------------

Step = tuple[str, Term, bool]  # (event, target, is_must)


def sos_transitions(p: Term, alphabet: EventAlphabet) -> list[Step]:
    """Outgoing transitions of ``p`` in summand order, duplicates removed."""
    match p:
        case Nil():
            return []
        case Bot():
            return [(e, BOT, False) for e in alphabet]
        case MustPrefix(e, body):
            return [(e, body, True)]
        case MayPrefix(e, body):
            return [(e, body, False)]
        case Sum():
            return list(dict.fromkeys(step for s in summands(p) for step in sos_transitions(s, alphabet)))
    raise TypeError(f"not a term: {p!r}")


def operational_semantics(p: Term, alphabet: EventAlphabet | Iterable[str]) -> PointedSystem:
    """The modal system generated by the transition rules, pointed at ``p``.

    States are the distinct terms reachable from ``p``, named ``s0, s1, ...``
    in breadth-first discovery order.
    """
    if not isinstance(alphabet, EventAlphabet):
        alphabet = EventAlphabet.of(alphabet)
    _require_events(p, alphabet)
    names: dict[Term, str] = {p: "s0"}
    queue = deque([p])
    must, may = set(), set()
    while queue:
        term = queue.popleft()
        src = names[term]
        for e, target, is_must in sos_transitions(term, alphabet):
            if target not in names:
                names[target] = f"s{len(names)}"
                queue.append(target)
            triple = (src, e, names[target])
            may.add(triple)
            if is_must:
                must.add(triple)
    return PointedSystem(ModalSystem(alphabet, tuple(names.values()), frozenset(must), frozenset(may)), "s0")


# characteristic formulas ---------------------------------------------------------


def char_formula(p: Term, alphabet: EventAlphabet | Iterable[str]) -> Formula:
    """The HML formula asserted exactly by the systems refining ``p``."""
    if not isinstance(alphabet, EventAlphabet):
        alphabet = EventAlphabet.of(alphabet)
    _require_events(p, alphabet)
    memo: dict[Term, Formula] = {}

    def guards(allowed: str) -> list[Formula]:
        return [Not(Dia(b, TT)) for b in alphabet if b != allowed]

    def phi(t: Term) -> Formula:
        hit = memo.get(t)
        if hit is not None:
            return hit
        match t:
            case Nil():
                out = conj(Not(Dia(e, TT)) for e in alphabet)
            case Bot():
                out = TT
            case MustPrefix(e, body):
                inner = phi(body)
                out = conj([Dia(e, inner), box(e, inner)] + guards(e))
            case MayPrefix(e, body):
                out = conj([box(e, phi(body))] + guards(e))
            case Sum():
                steps = sos_transitions(t, alphabet)
                musts = [Dia(e, phi(r)) for e, r, is_must in steps if is_must]
                boxes = []
                for e in alphabet:
                    targets = dict.fromkeys(r for ev, r, _ in steps if ev == e)
                    boxes.append(box(e, disj(phi(r) for r in targets)))
                out = conj(musts + boxes)
            case _:
                raise TypeError(f"not a term: {t!r}")
        memo[t] = out
        return out

    return phi(p)


def phi_probe(
    trace: Sequence[str], event: str, p: Term, alphabet: EventAlphabet | Iterable[str]
) -> Formula:
    """``[d1]...[dn](<event>phi_p | !<event>phi_p)`` for ``trace = d1...dn``."""
    if not isinstance(alphabet, EventAlphabet):
        alphabet = EventAlphabet.of(alphabet)
    unknown = sorted({e for e in [*trace, event] if e not in alphabet})
    if unknown:
        raise TermError(f"probe uses events outside the alphabet: {', '.join(unknown)}")
    inner = Dia(event, char_formula(p, alphabet))
    out: Formula = disj2(inner, Not(inner))
    for d in reversed(trace):
        out = box(d, out)
    return out


# unfolding -----------------------------------------------------------------------


def unfold(p: PointedSystem, depth: int) -> Term:
    """Depth-``depth`` tree unwinding of ``p`` as a term.

    Internal musts become must-prefixes and may-only transitions become
    may-prefixes.  A leaf at the cut is ``bot`` when its state still has a
    may-successor and ``0`` otherwise.
    """
    if depth < 0:
        raise ValueError("unfolding depth must be non-negative")
    p = require_modal(p, "unfolding")
    sys = p.system
    memo: dict[tuple[str, int], Term] = {}

    def go(state: str, d: int) -> Term:
        key = (state, d)
        if key in memo:
            return memo[key]
        mays = sys.succ_c.get(state, {})
        if d == 0:
            out = BOT if mays else NIL
        else:
            musts = sys.succ_a.get(state, {})
            parts: list[Term] = []
            for e in sys.alphabet:
                must_targets = set(musts.get(e, ()))
                for t in mays.get(e, ()):
                    child = go(t, d - 1)
                    parts.append(MustPrefix(e, child) if t in must_targets else MayPrefix(e, child))
            out = sum_of(parts)
        memo[key] = out
        return out

    return go(p.init, depth)


def unfold_system(p: PointedSystem, depth: int) -> PointedSystem:
    return operational_semantics(unfold(p, depth), p.alphabet)


# enumeration ---------------------------------------------------------------------


def canonical_key(p: Term) -> tuple[int, int, str]:
    return (term_modal_depth(p), term_size(p), str(p))


def _terms_up_to(alphabet: EventAlphabet, depth: int, width: int) -> list[Term]:
    level: list[Term] = [NIL, BOT]
    for _ in range(depth):
        prefixes = [
            ctor(e, body)
            for body in level
            for e in alphabet
            for ctor in (MustPrefix, MayPrefix)
        ]
        prefixes.sort(key=canonical_key)
        sums = [
            sum_of(combo)
            for k in range(2, width + 1)
            for combo in itertools.combinations(prefixes, k)
        ]
        level = [NIL, BOT] + prefixes + sums
    return level


def enumerate_terms(
    alphabet: EventAlphabet | Iterable[str], max_depth: int, max_width: int, start: int = 0
) -> Iterator[Term]:
    """All terms up to the bounds, ordered by (modal depth, size, printed form).

    Sums combine 2 to ``max_width`` distinct prefixes, listed once in
    canonical order.  ``start`` skips that many terms of the sequence.
    """
    if max_depth < 0 or max_width < 0 or start < 0:
        raise ValueError("enumeration bounds must be non-negative")
    if not isinstance(alphabet, EventAlphabet):
        alphabet = EventAlphabet.of(alphabet)
    terms = sorted(_terms_up_to(alphabet, max_depth, max_width), key=canonical_key)
    return itertools.islice(iter(terms), start, None)


enumerate = enumerate_terms  # noqa: A001 - public name used by the CLI and tests
