"""Hennessy-Milner logic under the asserted/consistent judgment pair, and a
greatest-fixpoint-only mu-calculus for characteristic formulas.

``check(p, phi, Mode.A)`` is the asserted judgment: diamonds range over
must-transitions and negation flips to the consistent judgment, whose
diamonds range over may-transitions.  Boxes and disjunctions are derived,
so ``[e]phi`` under one mode quantifies over transitions of the other.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable

from mtskit._intern import Interned, weak_memo as _weak_memo
from mtskit.core import PointedSystem, reachable_ordered, require_modal


class Mode(enum.Enum):
    A = "a"
    C = "c"

    @property
    def dual(self) -> Mode:
        return Mode.C if self is Mode.A else Mode.A


class Verdict3(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    def __str__(self) -> str:
        return self.value


class UnknownEvent(ValueError):
    pass


# HML syntax ----------------------------------------------------------------


class Formula(Interned):
    def __str__(self) -> str:
        from mtskit.syntax import print_formula

        return print_formula(self)

    def __repr__(self) -> str:
        return f"Formula({self})"


@dataclass(frozen=True, eq=False, repr=False)
class Tt(Formula):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, eq=False, repr=False)
class Dia(Formula):
    event: str
    body: Formula


@dataclass(frozen=True, eq=False, repr=False)
class And(Formula):
    left: Formula
    right: Formula


TT = Tt()
FF = Not(TT)


def box(event: str, body: Formula) -> Formula:
    return Not(Dia(event, Not(body)))


def disj2(left: Formula, right: Formula) -> Formula:
    return Not(And(Not(left), Not(right)))


def conj(items: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``tt``."""
    result = None
    for item in items:
        result = item if result is None else And(result, item)
    return TT if result is None else result


def disj(items: Iterable[Formula]) -> Formula:
    """Left-nested disjunction; the empty disjunction is ``ff``."""
    result = None
    for item in items:
        result = item if result is None else disj2(result, item)
    return FF if result is None else result


@_weak_memo
def modal_depth(phi: Formula) -> int:
    match phi:
        case Tt():
            return 0
        case Not(body):
            return modal_depth(body)
        case Dia(_, body):
            return 1 + modal_depth(body)
        case And(left, right):
            return max(modal_depth(left), modal_depth(right))
    raise TypeError(f"not an HML formula: {phi!r}")


@_weak_memo
def formula_events(phi: Formula) -> frozenset[str]:
    match phi:
        case Tt():
            return frozenset()
        case Not(body):
            return formula_events(body)
        case Dia(event, body):
            return formula_events(body) | {event}
        case And(left, right):
            return formula_events(left) | formula_events(right)
    raise TypeError(f"not an HML formula: {phi!r}")


def _check_events(p: PointedSystem, events: Iterable[str]) -> None:
    unknown = sorted(e for e in events if e not in p.alphabet)
    if unknown:
        raise UnknownEvent(f"formula uses events outside the alphabet: {', '.join(unknown)}")


def check(p: PointedSystem, phi: Formula, mode: Mode = Mode.A) -> bool:
    _check_events(p, formula_events(phi))
    return Checker(p)(p.init, phi, mode)


class Checker:
    """Memoized evaluation of both judgments on one system.

    Reusing a checker across many formulas shares the memo table.
    """

    def __init__(self, p: PointedSystem) -> None:
        self.succ = {Mode.A: p.system.succ_a, Mode.C: p.system.succ_c}
        self.memo: dict[tuple[str, Formula, Mode], bool] = {}

    def __call__(self, state: str, phi: Formula, mode: Mode) -> bool:
        key = (state, phi, mode)
        cached = self.memo.get(key)
        if cached is not None:
            return cached
        match phi:
            case Tt():
                result = True
            case Not(body):
                result = not self(state, body, mode.dual)
            case Dia(event, body):
                targets = self.succ[mode].get(state, {}).get(event, ())
                result = any(self(t, body, mode) for t in targets)
            case And(left, right):
                result = self(state, left, mode) and self(state, right, mode)
            case _:
                raise TypeError(f"not an HML formula: {phi!r}")
        self.memo[key] = result
        return result


def check3(p: PointedSystem, phi: Formula) -> Verdict3:
    if check(p, phi, Mode.A):
        return Verdict3.TRUE
    if not check(p, phi, Mode.C):
        return Verdict3.FALSE
    return Verdict3.UNKNOWN


# greatest-fixpoint formulas -------------------------------------------------


class NuFormula(Interned):
    def __str__(self) -> str:
        from mtskit.syntax import print_nu

        return print_nu(self)

    def __repr__(self) -> str:
        return f"NuFormula({self})"


@dataclass(frozen=True, eq=False, repr=False)
class NTt(NuFormula):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class NFf(NuFormula):
    pass


@dataclass(frozen=True, eq=False, repr=False)
class NVar(NuFormula):
    name: str


@dataclass(frozen=True, eq=False, repr=False)
class NAnd(NuFormula):
    items: tuple[NuFormula, ...]


@dataclass(frozen=True, eq=False, repr=False)
class NOr(NuFormula):
    items: tuple[NuFormula, ...]


@dataclass(frozen=True, eq=False, repr=False)
class NDia(NuFormula):
    event: str
    body: NuFormula


@dataclass(frozen=True, eq=False, repr=False)
class NBox(NuFormula):
    event: str
    body: NuFormula


@dataclass(frozen=True, eq=False, repr=False)
class Nu(NuFormula):
    var: str
    body: NuFormula


NTT = NTt()
NFF = NFf()


def nu_and(items: Iterable[NuFormula]) -> NuFormula:
    items = tuple(items)
    if not items:
        return NTT
    return items[0] if len(items) == 1 else NAnd(items)


def nu_or(items: Iterable[NuFormula]) -> NuFormula:
    items = tuple(items)
    if not items:
        return NFF
    return items[0] if len(items) == 1 else NOr(items)


@_weak_memo
def free_vars(psi: NuFormula) -> frozenset[str]:
    match psi:
        case NTt() | NFf():
            return frozenset()
        case NVar(name):
            return frozenset({name})
        case NAnd(items) | NOr(items):
            return frozenset().union(*(free_vars(i) for i in items))
        case NDia(_, body) | NBox(_, body):
            return free_vars(body)
        case Nu(var, body):
            return free_vars(body) - {var}
    raise TypeError(f"not a nu-formula: {psi!r}")


def binders(psi: NuFormula) -> list[str]:
    match psi:
        case NAnd(items) | NOr(items):
            return [v for i in items for v in binders(i)]
        case NDia(_, body) | NBox(_, body):
            return binders(body)
        case Nu(var, body):
            return [var] + binders(body)
    return []


def nu_events(psi: NuFormula) -> frozenset[str]:
    match psi:
        case NAnd(items) | NOr(items):
            return frozenset().union(*(nu_events(i) for i in items))
        case NDia(event, body) | NBox(event, body):
            return nu_events(body) | {event}
        case Nu(_, body):
            return nu_events(body)
    return frozenset()


def characteristic_nu(p: PointedSystem) -> NuFormula:
    """Greatest-fixpoint formula satisfied by exactly the implementations refining ``p``.

    Each state occurrence gets its own binder; a successor already on the
    calling context refers back to the innermost binder for that state, any
    other successor is expanded in place (no sharing).
    """
    p = require_modal(p, "characteristic formula")
    sys = p.system
    counter = itertools.count(1)

    def expand(state: str, context: dict[str, str]) -> NuFormula:
        var = f"X{next(counter)}"
        inner = {**context, state: var}

        def ref(target: str) -> NuFormula:
            return NVar(inner[target]) if target in inner else expand(target, inner)

        musts = [
            NDia(e, ref(t))
            for e, targets in sys.succ_a.get(state, {}).items()
            for t in targets
        ]
        mays = sys.succ_c.get(state, {})
        boxes = [NBox(e, nu_or(ref(t) for t in mays.get(e, ()))) for e in sys.alphabet]
        return Nu(var, nu_and(musts + boxes))

    return expand(p.init, {})


class UnboundVariable(ValueError):
    pass


def check_nu(l: PointedSystem, psi: NuFormula) -> bool:
    """Evaluate a closed nu-formula on an implementation (r_a = r_c on reachable states)."""
    from mtskit.refinement import is_implementation

    if not is_implementation(l):
        raise ValueError("check_nu requires an implementation (no reachable may-only transitions)")
    unbound = free_vars(psi)
    if unbound:
        raise UnboundVariable(f"unbound variables: {', '.join(sorted(unbound))}")
    _check_events(l, nu_events(psi))
    states = frozenset(reachable_ordered(l))
    succ = l.system.succ_a
    memo: dict[tuple, frozenset[str]] = {}

    def ev(node: NuFormula, env: dict[str, frozenset[str]]) -> frozenset[str]:
        fv = sorted(free_vars(node))
        key = (node, tuple(env[v] for v in fv))
        hit = memo.get(key)
        if hit is not None:
            return hit
        match node:
            case NTt():
                out = states
            case NFf():
                out = frozenset()
            case NVar(name):
                out = env[name]
            case NAnd(items):
                out = states
                for i in items:
                    out = out & ev(i, env)
                    if not out:
                        break
            case NOr(items):
                out = frozenset()
                for i in items:
                    out = out | ev(i, env)
            case NDia(e, body):
                inner = ev(body, env)
                out = frozenset(
                    s for s in states if any(t in inner for t in succ.get(s, {}).get(e, ()))
                )
            case NBox(e, body):
                inner = ev(body, env)
                out = frozenset(
                    s for s in states if all(t in inner for t in succ.get(s, {}).get(e, ()))
                )
            case Nu(var, body):
                current = states
                while True:
                    nxt = ev(body, {**env, var: current})
                    if nxt == current:
                        break
                    current = nxt
                out = current
            case _:
                raise TypeError(f"not a nu-formula: {node!r}")
        memo[key] = out
        return out

    return l.init in ev(psi, {})


def to_nu(phi: Formula) -> NuFormula:
    """Negation normal form of an HML formula as a binder-free nu-formula."""

    def pos(f: Formula) -> NuFormula:
        match f:
            case Tt():
                return NTT
            case Not(body):
                return neg(body)
            case Dia(e, body):
                return NDia(e, pos(body))
            case And(left, right):
                return NAnd((pos(left), pos(right)))
        raise TypeError(f"not an HML formula: {f!r}")

    def neg(f: Formula) -> NuFormula:
        match f:
            case Tt():
                return NFF
            case Not(body):
                return pos(body)
            case Dia(e, body):
                return NBox(e, neg(body))
            case And(left, right):
                return NOr((neg(left), neg(right)))
        raise TypeError(f"not an HML formula: {f!r}")

    return pos(phi)
