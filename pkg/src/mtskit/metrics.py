"""Dyadic distances between partial systems and between their implementation sets.

Every value is either exactly zero or exactly ``2^-n``; nothing here ever
touches floating point.  Quantities defined as a supremum over infinitely
many implementations (``c2``, the Hausdorff lift) are computed over the
depth-``K`` slices of the implementation sets and reported as an
:class:`IntervalEstimate` that says whether the slice pinned the value.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction

from mtskit import mpa
from mtskit.core import PointedSystem, must_projection, require_modal, require_same_alphabet
from mtskit.refinement import (
    INFINITY,
    consistency_depth,
    equivalence_depth,
    is_implementation_equivalent,
)

DEFAULT_BUDGET = 10**4


class BudgetExceeded(RuntimeError):
    pass


@functools.total_ordering
@dataclass(frozen=True)
class DyadicDistance:
    """Zero (``exponent is None``) or ``2^-exponent``."""

    exponent: int | None

    def __post_init__(self) -> None:
        if self.exponent is not None and (not isinstance(self.exponent, int) or self.exponent < 0):
            raise ValueError("exponent must be a non-negative integer or None")

    @classmethod
    def zero(cls) -> DyadicDistance:
        return cls(None)

    @classmethod
    def pow2(cls, n: int) -> DyadicDistance:
        return cls(n)

    @classmethod
    def from_depth(cls, depth: int | float) -> DyadicDistance:
        """``2^-depth``, or zero for an infinite depth."""
        return cls(None) if depth == INFINITY else cls(int(depth))

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def as_fraction(self) -> Fraction:
        return Fraction(0) if self.exponent is None else Fraction(1, 2**self.exponent)

    def __lt__(self, other: DyadicDistance) -> bool:
        if not isinstance(other, DyadicDistance):
            return NotImplemented
        if self.exponent is None:
            return other.exponent is not None
        if other.exponent is None:
            return False
        return self.exponent > other.exponent

    def __str__(self) -> str:
        return "0" if self.exponent is None else f"2^-{self.exponent}"

    def to_json(self) -> dict:
        if self.exponent is None:
            return {"kind": "zero"}
        return {"kind": "dyadic", "n": self.exponent}

    @classmethod
    def from_json(cls, data: dict) -> DyadicDistance:
        if data["kind"] == "zero":
            return cls(None)
        if data["kind"] == "dyadic":
            return cls(int(data["n"]))
        raise ValueError(f"unknown distance kind {data['kind']!r}")


ZERO = DyadicDistance.zero()


@dataclass(frozen=True)
class IntervalEstimate:
    lower: DyadicDistance
    upper: DyadicDistance
    exact: bool

    def __post_init__(self) -> None:
        if self.upper < self.lower:
            raise ValueError("interval lower bound exceeds upper bound")
        if self.exact and self.lower != self.upper:
            raise ValueError("an exact estimate needs equal bounds")

    @classmethod
    def exactly(cls, value: DyadicDistance) -> IntervalEstimate:
        return cls(value, value, True)

    def __str__(self) -> str:
        return str(self.lower) if self.exact else f"[{self.lower}, {self.upper}]"

    def to_json(self) -> dict:
        return {"lower": self.lower.to_json(), "upper": self.upper.to_json(), "exact": self.exact}

    @classmethod
    def from_json(cls, data: dict) -> IntervalEstimate:
        return cls(
            DyadicDistance.from_json(data["lower"]),
            DyadicDistance.from_json(data["upper"]),
            bool(data["exact"]),
        )


def _modal_pair(p: PointedSystem, q: PointedSystem, what: str) -> tuple[PointedSystem, PointedSystem]:
    require_same_alphabet(p, q)
    return require_modal(p, what), require_modal(q, what)


def distance(p: PointedSystem, q: PointedSystem) -> DyadicDistance:
    """``2^-k`` for the equivalence depth ``k``; zero for refinement-equivalent systems."""
    p, q = _modal_pair(p, q, "distance")
    return DyadicDistance.from_depth(equivalence_depth(p, q))


def c1(p: PointedSystem, q: PointedSystem) -> DyadicDistance:
    """Optimistic measure: zero iff a common refinement exists, else ``2^-k`` for
    the deepest round ``k`` the consistency chain keeps the initial pair."""
    p, q = _modal_pair(p, q, "c1")
    return DyadicDistance.from_depth(consistency_depth(p, q))


# bounded implementation slices ---------------------------------------------------

ImplForm = frozenset  # frozenset of (event, ImplForm) pairs; the empty set is 0
_MAX_BRANCH = 20


def _hitting_subset_count(universe: frozenset, required: list[frozenset]) -> int:
    """Number of subsets of ``universe`` meeting every set in ``required``."""
    total = 0
    for r in range(len(required) + 1):
        for chosen in itertools.combinations(required, r):
            free = universe.difference(*chosen) if chosen else universe
            total += (-1) ** r * 2 ** len(free)
    return total


def _implementation_forms(p: PointedSystem, depth: int, budget: int) -> list[ImplForm]:
    sys = p.system
    memo: dict[tuple[str, int], list[ImplForm]] = {}

    def forms(state: str, d: int) -> list[ImplForm]:
        key = (state, d)
        if key in memo:
            return memo[key]
        if d == 0:
            memo[key] = [frozenset()]
            return memo[key]
        musts = sys.succ_a.get(state, {})
        mays = sys.succ_c.get(state, {})
        per_event: list[list[frozenset]] = []
        count = 1
        for e in sys.alphabet:
            options = {t: frozenset((e, f) for f in forms(t, d - 1)) for t in mays.get(e, ())}
            universe = frozenset().union(*options.values())
            required = [options[t] for t in musts.get(e, ())]
            n = _hitting_subset_count(universe, required)
            count *= n
            if count > budget:
                raise BudgetExceeded(
                    f"more than {budget} implementation prefixes of depth {d} at state {state!r}"
                )
            if len(universe) > _MAX_BRANCH:
                raise BudgetExceeded(f"{len(universe)} distinct {e}-successor prefixes at state {state!r}")
            ordered = sorted(universe, key=_pair_key)
            choices = []
            for r in range(len(ordered) + 1):
                for combo in itertools.combinations(ordered, r):
                    chosen = frozenset(combo)
                    if all(chosen & req for req in required):
                        choices.append(chosen)
            per_event.append(choices)
        out = [frozenset().union(*parts) for parts in itertools.product(*per_event)]
        memo[key] = out
        return out

    return forms(p.init, depth)


@functools.lru_cache(maxsize=1 << 16)
def _form_key(form: ImplForm) -> tuple:
    return tuple(sorted(_pair_key(pair) for pair in form))


def _pair_key(pair: tuple[str, ImplForm]) -> tuple:
    return (pair[0], _form_key(pair[1]))


def form_to_term(form: ImplForm) -> mpa.Term:
    parts = sorted(form, key=_pair_key)
    return mpa.sum_of([mpa.MustPrefix(e, form_to_term(child)) for e, child in parts])


def term_to_form(t: mpa.Term) -> ImplForm:
    """Canonical form of an implementation term; duplicate summands collapse."""
    if mpa.contains_partiality(t):
        raise ValueError(f"{t} is not an implementation term")
    if isinstance(t, mpa.Nil):
        return frozenset()
    return frozenset((s.event, term_to_form(s.body)) for s in mpa.summands(t))


@functools.lru_cache(maxsize=1 << 16)
def truncate(form: ImplForm, depth: int) -> ImplForm:
    if depth == 0:
        return frozenset()
    return frozenset((e, truncate(child, depth - 1)) for e, child in form)


def agreement_depth(x: ImplForm, y: ImplForm, depth: int) -> int:
    """Largest ``j <= depth`` at which the depth-``j`` truncations coincide."""
    j = 0
    while j < depth and truncate(x, j + 1) == truncate(y, j + 1):
        j += 1
    return j


def enumerate_bounded_implementations(
    p: PointedSystem, depth: int, budget: int = DEFAULT_BUDGET
) -> list[mpa.Term]:
    """All depth-``depth`` prefixes of implementations of ``p``, one per
    bisimulation class, as must-only terms in canonical order."""
    if depth < 0:
        raise ValueError("depth must be non-negative")
    p = require_modal(p, "implementation enumeration")
    forms = _implementation_forms(p, depth, budget)
    if len(forms) > budget:
        raise BudgetExceeded(f"more than {budget} implementation prefixes")
    return sorted((form_to_term(f) for f in forms), key=mpa.canonical_key)


def _implementation_slices(p, q, depth, budget):
    if depth < 1:
        raise ValueError("depth must be positive")
    p, q = _modal_pair(p, q, "implementation-set measures")
    xs = _implementation_forms(p, depth, budget)
    ys = _implementation_forms(q, depth, budget)
    if len(xs) * len(ys) > budget:
        raise BudgetExceeded(f"{len(xs)} x {len(ys)} implementation pairs exceed the budget of {budget}")
    table = [[agreement_depth(x, y, depth) for y in ys] for x in xs]
    return p, q, table


def _estimate(p, q, n: int, depth: int) -> IntervalEstimate:
    if n < depth:
        return IntervalEstimate.exactly(DyadicDistance.pow2(n))
    if is_implementation_equivalent(p) and is_implementation_equivalent(q):
        return IntervalEstimate.exactly(distance(must_projection(p), must_projection(q)))
    return IntervalEstimate(ZERO, DyadicDistance.pow2(depth), False)


def c2_bounded(
    p: PointedSystem, q: PointedSystem, depth: int, budget: int = DEFAULT_BUDGET
) -> IntervalEstimate:
    """Pessimistic measure: the largest distance between an implementation of
    ``p`` and one of ``q``, judged on depth-``depth`` prefixes."""
    p, q, table = _implementation_slices(p, q, depth, budget)
    n = min(min(row) for row in table)
    return _estimate(p, q, n, depth)


def hausdorff_bounded(
    p: PointedSystem, q: PointedSystem, depth: int, budget: int = DEFAULT_BUDGET
) -> IntervalEstimate:
    p, q, table = _implementation_slices(p, q, depth, budget)
    forward = min(max(row) for row in table)
    backward = min(max(col) for col in zip(*table))
    return _estimate(p, q, min(forward, backward), depth)


def truncated_c1(p: PointedSystem, q: PointedSystem, depth: int) -> DyadicDistance:
    """``c1`` with every value below ``2^-depth`` read as zero."""
    value = c1(p, q)
    if value.is_zero or value.exponent >= depth:
        return ZERO
    return value


def implementation_infimum(
    p: PointedSystem, q: PointedSystem, depth: int, budget: int = DEFAULT_BUDGET
) -> DyadicDistance:
    """Smallest truncated distance between enumerated implementation prefixes."""
    _, _, table = _implementation_slices(p, q, depth, budget)
    best = max(max(row) for row in table)
    return ZERO if best >= depth else DyadicDistance.pow2(best)


__all__ = [
    "BudgetExceeded",
    "DyadicDistance",
    "IntervalEstimate",
    "ZERO",
    "agreement_depth",
    "c1",
    "c2_bounded",
    "distance",
    "enumerate_bounded_implementations",
    "form_to_term",
    "hausdorff_bounded",
    "implementation_infimum",
    "term_to_form",
    "truncate",
    "truncated_c1",
]
