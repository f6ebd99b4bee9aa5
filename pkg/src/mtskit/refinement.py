"""Refinement between pointed mixed/modal systems and related fixpoints.

Argument order is always ``(abstract, concrete)``: ``refines(a, c)`` holds
when ``c`` refines ``a``.  Every fixpoint is computed by synchronous rounds
of removal from the full product, so round ``k`` is exactly the ``k``-th
approximant and the greatest fixpoint is the stable round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

from mtskit.core import (
    MixedSystem,
    ModalSystem,
    PointedSystem,
    require_modal,
    require_same_alphabet,
    trim,
)

Pair = tuple[str, str]
INFINITY = math.inf


class MixConditionViolated(ValueError):
    def __init__(self, transition: tuple[str, str, str]) -> None:
        self.transition = transition
        s, e, t = transition
        super().__init__(f"mix condition violated by must-transition ({s}, {e}, {t})")


class InternalValidationError(RuntimeError):
    """A constructed artifact failed its runtime self-check."""


@dataclass(frozen=True)
class RefinementRelation:
    pairs: frozenset[Pair]
    abstract: MixedSystem
    concrete: MixedSystem

    def __contains__(self, pair: object) -> bool:
        return pair in self.pairs

    def ordered(self) -> list[Pair]:
        ia, ic = self.abstract.state_index, self.concrete.state_index
        return sorted(self.pairs, key=lambda p: (ia[p[0]], ic[p[1]]))


@dataclass(frozen=True)
class BoundedRelationChain:
    """Q_0 ⊇ Q_1 ⊇ ... ⊇ Q_k with Q_k stable."""

    relations: tuple[frozenset[Pair], ...]

    def at(self, k: int) -> frozenset[Pair]:
        return self.relations[min(k, len(self.relations) - 1)]

    @property
    def stable(self) -> frozenset[Pair]:
        return self.relations[-1]

    @property
    def stabilization_index(self) -> int:
        return len(self.relations) - 1

    def survives_until(self, pair: Pair) -> int | float:
        """Largest k with ``pair`` in Q_k (INFINITY if it is in the stable relation)."""
        for k, rel in enumerate(self.relations):
            if pair not in rel:
                return k - 1
        return INFINITY


def _refinement_ok(m: MixedSystem, n: MixedSystem) -> Callable[[Pair, frozenset[Pair]], bool]:
    ma, mc, na, nc = m.succ_a, m.succ_c, n.succ_a, n.succ_c

    def ok(pair: Pair, rel: frozenset[Pair]) -> bool:
        s, t = pair
        n_must = na.get(t, {})
        for e, targets in ma.get(s, {}).items():
            answers = n_must.get(e, ())
            for s2 in targets:
                if not any((s2, t2) in rel for t2 in answers):
                    return False
        m_may = mc.get(s, {})
        for e, targets in nc.get(t, {}).items():
            answers = m_may.get(e, ())
            for t2 in targets:
                if not any((s2, t2) in rel for s2 in answers):
                    return False
        return True

    return ok


def _consistency_ok(m: MixedSystem, n: MixedSystem) -> Callable[[Pair, frozenset[Pair]], bool]:
    ma, mc, na, nc = m.succ_a, m.succ_c, n.succ_a, n.succ_c

    def ok(pair: Pair, rel: frozenset[Pair]) -> bool:
        s, t = pair
        n_may = nc.get(t, {})
        for e, targets in ma.get(s, {}).items():
            answers = n_may.get(e, ())
            for s2 in targets:
                if not any((s2, t2) in rel for t2 in answers):
                    return False
        m_may = mc.get(s, {})
        for e, targets in na.get(t, {}).items():
            answers = m_may.get(e, ())
            for t2 in targets:
                if not any((s2, t2) in rel for s2 in answers):
                    return False
        return True

    return ok


def _rounds(m: MixedSystem, n: MixedSystem, ok) -> Iterator[frozenset[Pair]]:
    rel = frozenset((s, t) for s in m.states for t in n.states)
    yield rel
    while True:
        nxt = frozenset(p for p in rel if ok(p, rel))
        if nxt == rel:
            return
        rel = nxt
        yield rel


def _chain(m: MixedSystem, n: MixedSystem, ok_factory) -> BoundedRelationChain:
    return BoundedRelationChain(tuple(_rounds(m, n, ok_factory(m, n))))


def refinement_chain(m: PointedSystem, n: PointedSystem) -> BoundedRelationChain:
    require_same_alphabet(m, n)
    return _chain(m.system, n.system, _refinement_ok)


def greatest_refinement(m: PointedSystem, n: PointedSystem) -> RefinementRelation:
    chain = refinement_chain(m, n)
    return RefinementRelation(chain.stable, m.system, n.system)


def refines(abstract: PointedSystem, concrete: PointedSystem) -> bool:
    """True iff ``concrete`` refines ``abstract``."""
    require_same_alphabet(abstract, concrete)
    a, c = trim(abstract), trim(concrete)
    chain = _chain(a.system, c.system, _refinement_ok)
    return (a.init, c.init) in chain.stable


def refinement_equivalent(p: PointedSystem, q: PointedSystem) -> bool:
    return refines(p, q) and refines(q, p)


def bounded_refinement(m: PointedSystem, n: PointedSystem, k: int) -> frozenset[Pair]:
    if k < 0:
        raise ValueError("k must be non-negative")
    return refinement_chain(m, n).at(k)


def equivalence_depth(p: PointedSystem, q: PointedSystem) -> int | float:
    """Largest k with the initial pair in Q_k of both directed chains, or INFINITY."""
    require_same_alphabet(p, q)
    a, b = trim(p), trim(q)
    forward = _chain(a.system, b.system, _refinement_ok).survives_until((a.init, b.init))
    backward = _chain(b.system, a.system, _refinement_ok).survives_until((b.init, a.init))
    return min(forward, backward)


def mix_condition_violations(sys: MixedSystem) -> list[tuple[str, str, str]]:
    pointed = PointedSystem(sys, sys.states[0]) if sys.states else None
    if pointed is None:
        return []
    greatest = refinement_chain(pointed, pointed).stable
    both = sys.r_a & sys.r_c
    bad = []
    for s, e, s1 in sys.ordered(sys.r_a):
        if not any(
            (s, e, s2) in both and (s1, s2) in greatest for s2 in sys.succ_a.get(s, {}).get(e, ())
        ):
            bad.append((s, e, s1))
    return bad


def satisfies_mix_condition(sys: MixedSystem) -> bool:
    return not mix_condition_violations(sys)


def normalize_mixed(p: PointedSystem) -> PointedSystem:
    """Turn a mixed system satisfying the mix condition into a refinement-equivalent modal one."""
    bad = mix_condition_violations(p.system)
    if bad:
        raise MixConditionViolated(bad[0])
    sys = p.system
    return PointedSystem(ModalSystem(sys.alphabet, sys.states, sys.r_a & sys.r_c, sys.r_c), p.init)


def is_implementation(p: PointedSystem) -> bool:
    from mtskit.core import reachable

    p = require_modal(p, "implementation check")
    live = reachable(p)
    return not any(s in live for s, _, _ in p.system.r_c - p.system.r_a)


def is_implementation_equivalent(p: PointedSystem) -> bool:
    from mtskit.core import must_projection

    p = require_modal(p, "implementation-equivalence check")
    return refines(must_projection(p), p)


# consistency ---------------------------------------------------------------


def consistency_chain(m: PointedSystem, n: PointedSystem) -> BoundedRelationChain:
    require_same_alphabet(m, n)
    m = require_modal(m, "consistency")
    n = require_modal(n, "consistency")
    return _chain(m.system, n.system, _consistency_ok)


def consistency_relation(m: PointedSystem, n: PointedSystem) -> frozenset[Pair]:
    return consistency_chain(m, n).stable


def bounded_consistency(m: PointedSystem, n: PointedSystem, k: int) -> bool:
    if k < 0:
        raise ValueError("k must be non-negative")
    return (m.init, n.init) in consistency_chain(m, n).at(k)


def consistency_depth(m: PointedSystem, n: PointedSystem) -> int | float:
    """Largest k with ``bounded_consistency(m, n, k)``; INFINITY when consistent."""
    require_same_alphabet(m, n)
    a, b = trim(require_modal(m)), trim(require_modal(n))
    chain = _chain(a.system, b.system, _consistency_ok)
    return chain.survives_until((a.init, b.init))


def _pair_name(s: str, t: str) -> str:
    return f"({s},{t})"


def common_refinement(m: PointedSystem, n: PointedSystem) -> PointedSystem | None:
    """A modal system refining both inputs, or None when they are inconsistent."""
    cons = consistency_relation(m, n)
    if (m.init, n.init) not in cons:
        return None
    ms, ns = m.system, n.system
    ordered = sorted(cons, key=lambda p: (ms.state_index[p[0]], ns.state_index[p[1]]))
    r_a, r_c = set(), set()
    for s, t in ordered:
        src = _pair_name(s, t)
        for e, s_targets in ms.succ_c.get(s, {}).items():
            for t2 in ns.succ_c.get(t, {}).get(e, ()):
                for s2 in s_targets:
                    if (s2, t2) not in cons:
                        continue
                    triple = (src, e, _pair_name(s2, t2))
                    r_c.add(triple)
                    if (s, e, s2) in ms.r_a or (t, e, t2) in ns.r_a:
                        r_a.add(triple)
    witness = PointedSystem(
        ModalSystem(ms.alphabet, tuple(_pair_name(s, t) for s, t in ordered), r_a, r_c),
        _pair_name(m.init, n.init),
    )
    if not (refines(m, witness) and refines(n, witness)):
        raise InternalValidationError("common refinement witness failed its refinement self-check")
    return witness


def distinguishing_formula(abstract: PointedSystem, concrete: PointedSystem):
    """An HML formula asserted by ``abstract`` but not by ``concrete``.

    It is the characteristic formula of the shallowest unfolding of
    ``abstract`` that ``concrete`` fails to refine.
    """
    from mtskit import hml, mpa

    require_same_alphabet(abstract, concrete)
    abstract = require_modal(abstract, "distinguishing formula")
    concrete = require_modal(concrete, "distinguishing formula")
    a, c = trim(abstract), trim(concrete)
    chain = _chain(a.system, c.system, _refinement_ok)
    first_failure = chain.survives_until((a.init, c.init))
    if first_failure == INFINITY:
        raise ValueError("concrete refines abstract; no distinguishing formula exists")
    for depth in range(int(first_failure) + 2):
        term = mpa.unfold(abstract, depth)
        if not refines(mpa.operational_semantics(term, abstract.alphabet), concrete):
            break
    else:  # pragma: no cover - excluded by the bounded-unfolding argument
        raise InternalValidationError("no failing unfolding found within the chain bound")
    phi = mpa.char_formula(term, abstract.alphabet)
    if not hml.check(abstract, phi, hml.Mode.A) or hml.check(concrete, phi, hml.Mode.A):
        raise InternalValidationError("distinguishing formula failed its model-check self-test")
    return phi
