"""Finite mixed and modal transition systems.

A system carries two transition relations over an explicit event alphabet:
``r_a`` (asserted, must) and ``r_c`` (consistent, may).  A system is modal
when ``r_a`` is contained in ``r_c``.  All values are immutable; states are
opaque strings kept in declaration order so every derived output is
deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

Transition = tuple[str, str, str]


class AlphabetMismatch(ValueError):
    """Two systems combined by a binary operation declare different events."""

    def __init__(self, left: EventAlphabet, right: EventAlphabet) -> None:
        only_left = [e for e in left.events if e not in right]
        only_right = [e for e in right.events if e not in left]
        self.only_left = only_left
        self.only_right = only_right
        super().__init__(
            "alphabet mismatch: only in first "
            f"{{{', '.join(only_left)}}}, only in second {{{', '.join(only_right)}}}"
        )


class NotModal(ValueError):
    pass


@dataclass(frozen=True)
class EventAlphabet:
    events: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.events:
            raise ValueError("event alphabet must be nonempty")
        if len(set(self.events)) != len(self.events):
            raise ValueError("duplicate event in alphabet")

    @classmethod
    def of(cls, events: Iterable[str]) -> EventAlphabet:
        return cls(tuple(dict.fromkeys(events)))

    def __contains__(self, event: object) -> bool:
        return event in self._index

    def __iter__(self):
        return iter(self.events)

    def __len__(self) -> int:
        return len(self.events)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {e: i for i, e in enumerate(self.events)}

    def index(self, event: str) -> int:
        return self._index[event]

    def same_events(self, other: EventAlphabet) -> bool:
        return set(self.events) == set(other.events)

    def union(self, other: EventAlphabet) -> EventAlphabet:
        return EventAlphabet.of(self.events + other.events)

    def __str__(self) -> str:
        return " ".join(self.events)


@dataclass(frozen=True)
class MixedSystem:
    """Two labelled transition relations over one state set.

    The constructor does not reject ill-formed data; :func:`validate`
    produces the diagnostics.
    """

    alphabet: EventAlphabet
    states: tuple[str, ...]
    r_a: frozenset[Transition]
    r_c: frozenset[Transition]

    kind = "mixed"

    def __post_init__(self) -> None:
        object.__setattr__(self, "states", tuple(dict.fromkeys(self.states)))
        object.__setattr__(self, "r_a", frozenset(self.r_a))
        object.__setattr__(self, "r_c", frozenset(self.r_c))

    @cached_property
    def state_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    def _sort_key(self, t: Transition) -> tuple[int, int, int]:
        si, ai = self.state_index, self.alphabet._index
        return (si.get(t[0], len(si)), ai.get(t[1], len(ai)), si.get(t[2], len(si)))

    def ordered(self, transitions: Iterable[Transition]) -> list[Transition]:
        return sorted(transitions, key=lambda t: (self._sort_key(t), t))

    @cached_property
    def succ_a(self) -> dict[str, dict[str, tuple[str, ...]]]:
        return _successors(self, self.r_a)

    @cached_property
    def succ_c(self) -> dict[str, dict[str, tuple[str, ...]]]:
        return _successors(self, self.r_c)

    def successors(self, state: str, mode: str) -> Mapping[str, tuple[str, ...]]:
        table = self.succ_a if mode == "a" else self.succ_c
        return table.get(state, {})

    @property
    def is_modal(self) -> bool:
        return self.r_a <= self.r_c

    def with_alphabet(self, alphabet: EventAlphabet) -> MixedSystem:
        return type(self)(alphabet, self.states, self.r_a, self.r_c)


class ModalSystem(MixedSystem):
    """A mixed system whose must-transitions are all may-transitions."""

    kind = "modal"

    @property
    def must(self) -> frozenset[Transition]:
        return self.r_a

    @property
    def may_only(self) -> frozenset[Transition]:
        return self.r_c - self.r_a


def _successors(sys: MixedSystem, rel: frozenset[Transition]):
    table: dict[str, dict[str, list[str]]] = {}
    for s, e, t in sys.ordered(rel):
        table.setdefault(s, {}).setdefault(e, []).append(t)
    return {s: {e: tuple(ts) for e, ts in row.items()} for s, row in table.items()}


def modal_system(
    alphabet: EventAlphabet | Iterable[str],
    states: Iterable[str],
    must: Iterable[Transition] = (),
    may: Iterable[Transition] = (),
) -> ModalSystem:
    """Build a modal system from must- and may-transitions (musts are mays too)."""
    if not isinstance(alphabet, EventAlphabet):
        alphabet = EventAlphabet.of(alphabet)
    must = frozenset(must)
    return ModalSystem(alphabet, tuple(states), must, must | frozenset(may))


@dataclass(frozen=True)
class PointedSystem:
    system: MixedSystem
    init: str

    @property
    def alphabet(self) -> EventAlphabet:
        return self.system.alphabet

    @property
    def is_modal(self) -> bool:
        return self.system.is_modal

    def at(self, state: str) -> PointedSystem:
        if state not in self.system.state_index:
            raise KeyError(f"unknown state {state!r}")
        return PointedSystem(self.system, state)

    def with_alphabet(self, alphabet: EventAlphabet) -> PointedSystem:
        return PointedSystem(self.system.with_alphabet(alphabet), self.init)

    def __str__(self) -> str:
        from mtskit.syntax import print_system

        return print_system(self)


def as_modal(sys: MixedSystem) -> ModalSystem:
    """Reinterpret a system satisfying the modal condition as a ModalSystem."""
    if isinstance(sys, ModalSystem):
        return sys
    if not sys.is_modal:
        raise NotModal("r_a is not contained in r_c")
    return ModalSystem(sys.alphabet, sys.states, sys.r_a, sys.r_c)


def require_modal(p: PointedSystem, what: str = "operation") -> PointedSystem:
    if not p.is_modal:
        raise NotModal(f"{what} requires a modal system (normalize mixed input first)")
    if not isinstance(p.system, ModalSystem):
        return PointedSystem(as_modal(p.system), p.init)
    return p


def require_same_alphabet(p: PointedSystem, q: PointedSystem) -> None:
    if not p.alphabet.same_events(q.alphabet):
        raise AlphabetMismatch(p.alphabet, q.alphabet)


def validate(sys: MixedSystem, expect_modal: bool = False) -> list[str]:
    problems: list[str] = []
    declared = sys.state_index
    for name, rel in (("r_a", sys.r_a), ("r_c", sys.r_c)):
        for s, e, t in sys.ordered(rel):
            if e not in sys.alphabet:
                problems.append(f"unknown event {e!r} in {name} transition ({s}, {e}, {t})")
            for end in (s, t):
                if end not in declared:
                    problems.append(f"unknown state {end!r} in {name} transition ({s}, {e}, {t})")
    if expect_modal:
        for s, e, t in sys.ordered(sys.r_a - sys.r_c):
            problems.append(f"modal condition violated: ({s}, {e}, {t}) in r_a but not in r_c")
    return problems


def validate_pointed(p: PointedSystem, expect_modal: bool = False) -> list[str]:
    problems = validate(p.system, expect_modal)
    if p.init not in p.system.state_index:
        problems.append(f"initial state {p.init!r} is not declared")
    return problems


def reachable(p: PointedSystem) -> set[str]:
    sys = p.system
    seen = {p.init}
    queue = deque([p.init])
    while queue:
        s = queue.popleft()
        for table in (sys.succ_a, sys.succ_c):
            for targets in table.get(s, {}).values():
                for t in targets:
                    if t not in seen:
                        seen.add(t)
                        queue.append(t)
    return seen


def reachable_ordered(p: PointedSystem) -> list[str]:
    found = reachable(p)
    return [s for s in p.system.states if s in found]


def trim(p: PointedSystem) -> PointedSystem:
    """Drop unreachable states and their transitions."""
    keep = reachable(p)
    sys = p.system
    return PointedSystem(
        type(sys)(
            sys.alphabet,
            tuple(s for s in sys.states if s in keep),
            frozenset(t for t in sys.r_a if t[0] in keep),
            frozenset(t for t in sys.r_c if t[0] in keep),
        ),
        p.init,
    )


def must_projection(p: PointedSystem) -> PointedSystem:
    p = require_modal(p, "must projection")
    sys = p.system
    return PointedSystem(ModalSystem(sys.alphabet, sys.states, sys.r_a, sys.r_a), p.init)


@dataclass(frozen=True)
class Union:
    system: MixedSystem
    left: dict[str, str] = field(hash=False)
    right: dict[str, str] = field(hash=False)


def disjoint_union(m: MixedSystem, n: MixedSystem) -> Union:
    """Tagged sum of two systems; ``left``/``right`` map original states to tagged ones."""
    if not m.alphabet.same_events(n.alphabet):
        raise AlphabetMismatch(m.alphabet, n.alphabet)
    left = {s: f"1:{s}" for s in m.states}
    right = {s: f"2:{s}" for s in n.states}

    def move(rel, inj):
        return frozenset((inj[s], e, inj[t]) for s, e, t in rel)

    cls = ModalSystem if isinstance(m, ModalSystem) and isinstance(n, ModalSystem) else MixedSystem
    sys = cls(
        m.alphabet,
        tuple(left.values()) + tuple(right.values()),
        move(m.r_a, left) | move(n.r_a, right),
        move(m.r_c, left) | move(n.r_c, right),
    )
    return Union(sys, left, right)
