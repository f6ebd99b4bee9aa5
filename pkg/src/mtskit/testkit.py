"""Seeded generators, brute-force oracles and the ``mtskit-test`` harness.

The oracles here deliberately avoid the fixpoint engine in
:mod:`mtskit.refinement` and the metric code in :mod:`mtskit.metrics`:

* :func:`brute_force_refines` plays the refinement game as a memoized
  depth-bounded recursion over the raw transition sets;
* :func:`oracle_distance` compares the two systems on characteristic
  formulas of enumerated terms and of the systems' own bounded
  approximants, so it only relies on the model checker.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from mtskit import hml, mpa
from mtskit.core import EventAlphabet, ModalSystem, PointedSystem, trim
from mtskit.metrics import BudgetExceeded, DyadicDistance

EVENT_NAMES = ("a", "b", "c", "d", "e", "f")


@dataclass(frozen=True)
class GenParams:
    states: tuple[int, int] = (1, 4)
    events: tuple[int, int] = (1, 2)
    must_density: float = 0.25
    may_density: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        for lo, hi in (self.states, self.events):
            if not 1 <= lo <= hi:
                raise ValueError("ranges must satisfy 1 <= low <= high")
        if self.events[1] > len(EVENT_NAMES):
            raise ValueError(f"at most {len(EVENT_NAMES)} events")
        for d in (self.must_density, self.may_density):
            if not 0.0 <= d <= 1.0:
                raise ValueError("densities must lie in [0, 1]")
        if self.must_density + self.may_density > 1.0:
            raise ValueError("must and may densities must sum to at most 1")


def random_alphabet(rng: random.Random, params: GenParams) -> EventAlphabet:
    return EventAlphabet(EVENT_NAMES[: rng.randint(*params.events)])


def random_modal_system(
    params: GenParams, seed: int | None = None, alphabet: EventAlphabet | None = None
) -> PointedSystem:
    """A trimmed random modal system; a pure function of ``(params, seed)``."""
    rng = random.Random(params.seed if seed is None else seed)
    alphabet = alphabet or random_alphabet(rng, params)
    states = [f"s{i}" for i in range(rng.randint(*params.states))]
    must, may = set(), set()
    for s in states:
        for e in alphabet:
            for t in states:
                roll = rng.random()
                if roll < params.must_density:
                    must.add((s, e, t))
                elif roll < params.must_density + params.may_density:
                    may.add((s, e, t))
    sys_ = ModalSystem(alphabet, tuple(states), frozenset(must), frozenset(must | may))
    return trim(PointedSystem(sys_, "s0"))


def random_term(rng: random.Random, alphabet: EventAlphabet, depth: int, width: int = 2) -> mpa.Term:
    roll = rng.random()
    if depth == 0 or roll < 0.25:
        return mpa.NIL if rng.random() < 0.5 else mpa.BOT
    parts = []
    for _ in range(rng.randint(1, max(1, width))):
        ctor = mpa.MustPrefix if rng.random() < 0.5 else mpa.MayPrefix
        parts.append(ctor(rng.choice(alphabet.events), random_term(rng, alphabet, depth - 1, width)))
    return mpa.sum_of(parts)


def random_formula(
    rng: random.Random, alphabet: EventAlphabet, depth: int, size: int | None = None
) -> hml.Formula:
    """A random HML formula of modal depth at most ``depth``.

    ``size`` bounds the number of boolean connectives along any branch.
    """
    size = 2 * depth + 2 if size is None else size
    kinds = ["tt", "ff"]
    if size > 0:
        kinds += ["not", "and", "or"]
    if depth > 0:
        kinds += ["dia", "box", "dia", "box"]
    kind = rng.choice(kinds)
    if kind == "tt":
        return hml.TT
    if kind == "ff":
        return hml.FF
    if kind == "not":
        return hml.Not(random_formula(rng, alphabet, depth, size - 1))
    if kind in ("and", "or"):
        left = random_formula(rng, alphabet, depth, size - 1)
        right = random_formula(rng, alphabet, depth, size - 1)
        return hml.And(left, right) if kind == "and" else hml.disj2(left, right)
    event = rng.choice(alphabet.events)
    body = random_formula(rng, alphabet, depth - 1, size)
    return hml.Dia(event, body) if kind == "dia" else hml.box(event, body)


def random_refinement(p: PointedSystem, rng: random.Random) -> PointedSystem:
    """A system refining ``p``: each may-only transition is dropped, kept or made a must."""
    sys_ = p.system
    must, may = set(sys_.r_a), set(sys_.r_c)
    for tr in sys_.ordered(sys_.r_c - sys_.r_a):
        roll = rng.random()
        if roll < 1 / 3:
            may.discard(tr)
        elif roll < 2 / 3:
            must.add(tr)
    return PointedSystem(ModalSystem(sys_.alphabet, sys_.states, frozenset(must), frozenset(may)), p.init)


# oracles ---------------------------------------------------------------------------


class CapTooSmall(ValueError):
    pass


def _raw_successors(rel) -> dict[str, dict[str, list[str]]]:
    table: dict[str, dict[str, list[str]]] = {}
    for s, e, t in sorted(rel):
        table.setdefault(s, {}).setdefault(e, []).append(t)
    return table


def brute_force_refines(abstract: PointedSystem, concrete: PointedSystem, depth_cap: int | None = None) -> bool:
    """Does ``concrete`` refine ``abstract``?  Decided by a depth-bounded game.

    The abstract side challenges with a must (answered by a concrete must)
    and the concrete side with a may (answered by an abstract may).  A cap of
    at least the product of the state counts makes the bounded game exact.
    """
    if set(abstract.alphabet.events) != set(concrete.alphabet.events):
        raise ValueError("alphabets differ")
    bound = len(abstract.system.states) * len(concrete.system.states)
    cap = bound if depth_cap is None else depth_cap
    if cap < bound:
        raise CapTooSmall(f"depth cap {cap} is below the product bound {bound}")
    a_must, a_may = _raw_successors(abstract.system.r_a), _raw_successors(abstract.system.r_c)
    c_must, c_may = _raw_successors(concrete.system.r_a), _raw_successors(concrete.system.r_c)

    @lru_cache(maxsize=None)
    def holds(s: str, t: str, k: int) -> bool:
        if k == 0:
            return True
        for e, targets in a_must.get(s, {}).items():
            replies = c_must.get(t, {}).get(e, [])
            if not all(any(holds(s2, t2, k - 1) for t2 in replies) for s2 in targets):
                return False
        for e, targets in c_may.get(t, {}).items():
            replies = a_may.get(s, {}).get(e, [])
            if not all(any(holds(s2, t2, k - 1) for s2 in replies) for t2 in targets):
                return False
        return True

    return holds(abstract.init, concrete.init, cap)


def approximant(p: PointedSystem, depth: int) -> mpa.Term:
    """Depth-``depth`` unwinding with every frontier node replaced by ``bot``.

    Deadlocked states above the frontier become ``0``.  The formula of this
    term has modal depth at most ``depth``.
    """
    must = _raw_successors(p.system.r_a)
    may = _raw_successors(p.system.r_c)
    memo: dict[tuple[str, int], mpa.Term] = {}

    def go(s: str, k: int) -> mpa.Term:
        if k == 0:
            return mpa.BOT
        if (s, k) not in memo:
            parts = []
            for e in p.alphabet:
                musts = set(must.get(s, {}).get(e, []))
                for t in may.get(s, {}).get(e, []):
                    ctor = mpa.MustPrefix if t in musts else mpa.MayPrefix
                    parts.append(ctor(e, go(t, k - 1)))
            memo[(s, k)] = mpa.sum_of(parts)
        return memo[(s, k)]

    return go(p.init, depth)


class OracleUndetermined(BudgetExceeded):
    pass


def oracle_distance(
    p: PointedSystem,
    q: PointedSystem,
    depth_cap: int | None = None,
    enum_depth: int = 1,
    enum_width: int = 2,
) -> DyadicDistance:
    """Distance read off the shallowest characteristic formula separating ``p`` and ``q``.

    A separating formula of modal depth ``n + 1`` means the systems agree
    to depth ``n``.  Zero is only reported when the cap reaches the product
    of the state counts, past which no new separation can appear.
    """
    if set(p.alphabet.events) != set(q.alphabet.events):
        raise ValueError("alphabets differ")
    alphabet = p.alphabet
    bound = len(p.system.states) * len(q.system.states)
    cap = bound if depth_cap is None else depth_cap
    candidates = list(mpa.enumerate_terms(alphabet, enum_depth, enum_width))
    for k in range(cap + 1):
        candidates += [approximant(p, k), approximant(q, k)]
    check_p, check_q = hml.Checker(p), hml.Checker(q)
    best = None
    for t in dict.fromkeys(candidates):
        phi = mpa.char_formula(t, alphabet)
        depth = hml.modal_depth(phi)
        if best is not None and depth >= best:
            continue
        if check_p(p.init, phi, hml.Mode.A) != check_q(q.init, phi, hml.Mode.A):
            best = depth
    if best is not None:
        return DyadicDistance.pow2(best - 1)
    if cap < bound:
        raise OracleUndetermined(f"no separating formula up to depth {cap}; below product bound {bound}")
    return DyadicDistance.zero()


# shrinking ------------------------------------------------------------------------


def _without_state(p: PointedSystem, state: str) -> PointedSystem:
    sys_ = p.system
    keep = lambda tr: state not in (tr[0], tr[2])  # noqa: E731
    return PointedSystem(
        type(sys_)(
            sys_.alphabet,
            tuple(s for s in sys_.states if s != state),
            frozenset(filter(keep, sys_.r_a)),
            frozenset(filter(keep, sys_.r_c)),
        ),
        p.init,
    )


def _without_transition(p: PointedSystem, tr) -> PointedSystem:
    sys_ = p.system
    return PointedSystem(type(sys_)(sys_.alphabet, sys_.states, sys_.r_a - {tr}, sys_.r_c - {tr}), p.init)


def _smaller(p: PointedSystem):
    for s in p.system.states:
        if s != p.init:
            yield _without_state(p, s)
    for tr in p.system.ordered(p.system.r_c | p.system.r_a):
        yield _without_transition(p, tr)


def shrink(systems: Sequence[PointedSystem], fails: Callable[..., bool]) -> list[PointedSystem]:
    """Greedily delete states, then transitions, while ``fails(*systems)`` stays true."""
    current = list(systems)
    progress = True
    while progress:
        progress = False
        for i in range(len(current)):
            for candidate in _smaller(current[i]):
                trial = current[:i] + [candidate] + current[i + 1 :]
                try:
                    still = fails(*trial)
                except Exception:
                    still = False
                if still:
                    current = trial
                    progress = True
                    break
            if progress:
                break
    return current


# harness --------------------------------------------------------------------------


@dataclass
class SuiteReport:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)


def _case_rng(seed: int, suite: str, index: int) -> random.Random:
    return random.Random(f"{seed}:{suite}:{index}")


SMALL = GenParams(states=(1, 4), events=(1, 2), must_density=0.2, may_density=0.2)


def _psip_case(rng: random.Random):
    from mtskit.refinement import refines

    q = random_modal_system(SMALL, rng.randrange(2**32))
    term = random_term(rng, q.alphabet, rng.randint(0, 3))

    def fails(q_):
        lhs = refines(mpa.operational_semantics(term, q_.alphabet), q_)
        rhs = hml.check(q_, mpa.char_formula(term, q_.alphabet), hml.Mode.A)
        return lhs != rhs

    return fails, [q], f"term {term}"


def _metrics_case(rng: random.Random):
    from mtskit.metrics import distance

    p = random_modal_system(SMALL, rng.randrange(2**32))
    q = random_modal_system(SMALL, rng.randrange(2**32), alphabet=p.alphabet)

    def fails(p_, q_):
        return distance(p_, q_) != oracle_distance(p_, q_) or distance(p_, q_) != distance(q_, p_)

    return fails, [p, q], "distance vs oracle"


def _consistency_case(rng: random.Random):
    from mtskit.metrics import c1, implementation_infimum, truncated_c1
    from mtskit.refinement import common_refinement

    p = random_modal_system(SMALL, rng.randrange(2**32))
    q = random_modal_system(SMALL, rng.randrange(2**32), alphabet=p.alphabet)

    def fails(p_, q_):
        kernel = c1(p_, q_).is_zero == (common_refinement(p_, q_) is not None)
        return not kernel or truncated_c1(p_, q_, 3) != implementation_infimum(p_, q_, 3)

    return fails, [p, q], "c1 kernel and brute-force infimum"


SUITES = {"psip": _psip_case, "metrics": _metrics_case, "consistency": _consistency_case}


def run_suite(name: str, cases: int, seed: int, out=sys.stdout) -> SuiteReport:
    report = SuiteReport(name)
    for i in range(cases):
        fails, systems, label = SUITES[name](_case_rng(seed, name, i))
        report.cases += 1
        try:
            failed = fails(*systems)
        except BudgetExceeded:
            continue
        if failed:
            small = shrink(systems, fails)
            text = "\n".join(str(s) for s in small)
            report.failures.append(f"case {i} ({label}), seed {seed}; minimized input:\n{text}")
            print(report.failures[-1], file=out)
    return report


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="mtskit-test", description="Randomized cross-validation harness.")
    parser.add_argument("--suite", choices=[*SUITES, "all"], default="all")
    parser.add_argument("--cases", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    print(f"seed {args.seed}")
    names = list(SUITES) if args.suite == "all" else [args.suite]
    failed = 0
    for name in names:
        report = run_suite(name, args.cases, args.seed)
        status = "ok" if not report.failures else f"{len(report.failures)} failing"
        print(f"{name}: {report.cases} cases, {status}")
        failed += len(report.failures)
    return 1 if failed else 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
