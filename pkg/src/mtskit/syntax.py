"""Text formats: transition-system files, HML formulas, greatest-fixpoint
formulas and process terms.

Every printer produces text that its parser maps back to the identical
value (formulas and terms are interned, so "identical" means ``is``).
Errors carry 1-based line and column numbers.
"""

from __future__ import annotations

import bisect
import re
from dataclasses import dataclass
from typing import Callable

from mtskit import hml, mpa
from mtskit.core import (
    EventAlphabet,
    MixedSystem,
    ModalSystem,
    PointedSystem,
)

IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
RESERVED = frozenset({"tt", "ff", "nu", "bot"})


class ParseError(ValueError):
    def __init__(self, message: str, line: int, col: int) -> None:
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}")


# systems ---------------------------------------------------------------------


def parse_system(text: str) -> PointedSystem:
    header = None
    alphabet: list[str] | None = None
    declared: list[str] | None = None
    init = None
    rows: list[tuple[int, int, str, str, str, str]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        col = len(body) - len(body.lstrip()) + 1
        words = body.split()
        key = words[0]
        if header is None:
            if key != "mts" or len(words) != 2 or words[1] not in ("modal", "mixed"):
                raise ParseError("expected 'mts modal' or 'mts mixed' header", lineno, col)
            header = words[1]
            continue
        if key == "alphabet:":
            if alphabet is not None:
                raise ParseError("duplicate alphabet line", lineno, col)
            if len(words) == 1:
                raise ParseError("alphabet must be nonempty", lineno, col)
            for w in words[1:]:
                if not IDENT.fullmatch(w) or w in RESERVED:
                    raise ParseError(f"invalid event name {w!r}", lineno, body.index(w) + 1)
            if len(set(words[1:])) != len(words) - 1:
                raise ParseError("duplicate event in alphabet", lineno, col)
            alphabet = words[1:]
        elif key == "states:":
            if declared is not None:
                raise ParseError("duplicate states line", lineno, col)
            declared = words[1:]
        elif key == "init:":
            if init is not None:
                raise ParseError("duplicate init line", lineno, col)
            if len(words) != 2:
                raise ParseError("init line takes exactly one state", lineno, col)
            init = (words[1], lineno, body.index(words[1], col) + 1)
        else:
            labels = ("must", "may") if header == "modal" else ("a", "c")
            if key not in labels:
                raise ParseError(
                    f"expected one of {', '.join(labels)} in an 'mts {header}' file, got {key!r}",
                    lineno,
                    col,
                )
            if len(words) != 4:
                raise ParseError("transition line needs: label source event target", lineno, col)
            rows.append((lineno, col, key, words[1], words[2], words[3]))

    if header is None:
        raise ParseError("empty input", 1, 1)
    if alphabet is None:
        raise ParseError("missing alphabet line", 1, 1)
    if init is None:
        raise ParseError("missing init line", 1, 1)

    events = set(alphabet)
    states = list(declared) if declared is not None else [init[0]]
    known = set(states)
    if declared is not None and init[0] not in known:
        raise ParseError(f"unknown state {init[0]!r}", init[1], init[2])
    r_a, r_c = set(), set()
    for lineno, col, label, s, e, t in rows:
        if e not in events:
            raise ParseError(f"unknown event {e!r}", lineno, col)
        for st in (s, t):
            if st not in known:
                if declared is not None:
                    raise ParseError(f"unknown state {st!r}", lineno, col)
                states.append(st)
                known.add(st)
        triple = (s, e, t)
        if label in ("must", "a"):
            r_a.add(triple)
        if label in ("must", "may", "c"):
            r_c.add(triple)
    cls = ModalSystem if header == "modal" else MixedSystem
    return PointedSystem(cls(EventAlphabet(tuple(alphabet)), tuple(states), frozenset(r_a), frozenset(r_c)), init[0])


def print_system(p: PointedSystem) -> str:
    sys = p.system
    modal = isinstance(sys, ModalSystem)
    lines = [
        f"mts {'modal' if modal else 'mixed'}",
        f"alphabet: {' '.join(sys.alphabet.events)}",
        f"states: {' '.join(sys.states)}",
        f"init: {p.init}",
    ]
    if modal:
        for s, e, t in sys.ordered(sys.r_c | sys.r_a):
            lines.append(f"{'must' if (s, e, t) in sys.r_a else 'may'} {s} {e} {t}")
    else:
        labelled = [(tr, "a") for tr in sys.r_a] + [(tr, "c") for tr in sys.r_c]
        labelled.sort(key=lambda item: (sys._sort_key(item[0]), item[0], item[1]))
        for (s, e, t), label in labelled:
            lines.append(f"{label} {s} {e} {t}")
    return "\n".join(lines) + "\n"


# tokens ----------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym>[()<>\[\]!&|.+?0]))")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", a symbol, or "end"
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line_starts = [0] + [i + 1 for i, ch in enumerate(text) if ch == "\n"]

    def where(offset: int) -> tuple[int, int]:
        line = bisect.bisect_right(line_starts, offset) - 1
        return line + 1, offset - line_starts[line] + 1

    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            tokens.append(Token("end", "", *where(pos)))
            return tokens
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", *where(pos))
        if m.group("ident") is not None:
            tokens.append(Token("ident", m.group("ident"), *where(m.start("ident"))))
        else:
            tokens.append(Token(m.group("sym"), m.group("sym"), *where(m.start("sym"))))
        pos = m.end()


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def peek(self) -> Token:
        return self.tokens[self.i]

    def next(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek
        return ParseError(message, tok.line, tok.col)

    def expect(self, kind: str) -> Token:
        tok = self.peek
        if tok.kind != kind:
            found = "end of input" if tok.kind == "end" else repr(tok.text)
            raise self.error(f"expected {kind!r}, found {found}")
        return self.next()

    def finish(self, value):
        if self.peek.kind != "end":
            raise self.error(f"unexpected {self.peek.text!r}")
        return value


# HML formulas ------------------------------------------------------------------


def parse_formula(text: str) -> hml.Formula:
    p = _Parser(text)
    return p.finish(_formula_or(p))


def _formula_or(p: _Parser) -> hml.Formula:
    left = _formula_and(p)
    while p.peek.kind == "|":
        p.next()
        left = hml.disj2(left, _formula_and(p))
    return left


def _formula_and(p: _Parser) -> hml.Formula:
    left = _formula_unary(p)
    while p.peek.kind == "&":
        p.next()
        left = hml.And(left, _formula_unary(p))
    return left


def _event(p: _Parser) -> str:
    tok = p.peek
    if tok.kind != "ident" or tok.text in RESERVED:
        raise p.error("expected an event name")
    return p.next().text


def _formula_unary(p: _Parser) -> hml.Formula:
    tok = p.peek
    if tok.kind == "!":
        p.next()
        return hml.Not(_formula_unary(p))
    if tok.kind == "<":
        p.next()
        e = _event(p)
        p.expect(">")
        return hml.Dia(e, _formula_unary(p))
    if tok.kind == "[":
        p.next()
        e = _event(p)
        p.expect("]")
        return hml.box(e, _formula_unary(p))
    if tok.kind == "(":
        p.next()
        inner = _formula_or(p)
        p.expect(")")
        return inner
    if tok.kind == "ident" and tok.text == "tt":
        p.next()
        return hml.TT
    if tok.kind == "ident" and tok.text == "ff":
        p.next()
        return hml.FF
    raise p.error("expected a formula")


_OR, _AND, _UNARY = 1, 2, 3


def print_formula(phi: hml.Formula) -> str:
    return _show_formula(phi)[0]


def _show_formula(phi: hml.Formula) -> tuple[str, int]:
    match phi:
        case hml.Tt():
            return "tt", _UNARY
        case hml.Not(hml.Tt()):
            return "ff", _UNARY
        case hml.Not(hml.Dia(e, hml.Not(body))):
            return f"[{e}]{_wrap(body, _UNARY)}", _UNARY
        case hml.Not(hml.And(hml.Not(left), hml.Not(right))):
            return f"{_wrap(left, _OR)} | {_wrap(right, _AND)}", _OR
        case hml.Not(body):
            return f"!{_wrap(body, _UNARY)}", _UNARY
        case hml.Dia(e, body):
            return f"<{e}>{_wrap(body, _UNARY)}", _UNARY
        case hml.And(left, right):
            return f"{_wrap(left, _AND)} & {_wrap(right, _UNARY)}", _AND
    raise TypeError(f"not an HML formula: {phi!r}")


def _wrap(phi: hml.Formula, need: int) -> str:
    text, prec = _show_formula(phi)
    return text if prec >= need else f"({text})"


# greatest-fixpoint formulas --------------------------------------------------------

_NU = 0


def parse_nu(text: str) -> hml.NuFormula:
    p = _Parser(text)
    return p.finish(_nu_top(p))


def _nu_top(p: _Parser) -> hml.NuFormula:
    if p.peek.kind == "ident" and p.peek.text == "nu":
        p.next()
        var = p.expect("ident")
        if var.text in ("tt", "ff", "nu"):
            raise p.error(f"{var.text!r} cannot be a variable", var)
        p.expect(".")
        return hml.Nu(var.text, _nu_top(p))
    return _nu_or(p)


def _nu_or(p: _Parser) -> hml.NuFormula:
    items = [_nu_and(p)]
    while p.peek.kind == "|":
        p.next()
        items.append(_nu_and(p))
    return items[0] if len(items) == 1 else hml.NOr(tuple(items))


def _nu_and(p: _Parser) -> hml.NuFormula:
    items = [_nu_unary(p)]
    while p.peek.kind == "&":
        p.next()
        items.append(_nu_unary(p))
    return items[0] if len(items) == 1 else hml.NAnd(tuple(items))


def _nu_unary(p: _Parser) -> hml.NuFormula:
    tok = p.peek
    if tok.kind == "<":
        p.next()
        e = _event(p)
        p.expect(">")
        return hml.NDia(e, _nu_unary(p))
    if tok.kind == "[":
        p.next()
        e = _event(p)
        p.expect("]")
        return hml.NBox(e, _nu_unary(p))
    if tok.kind == "(":
        p.next()
        inner = _nu_top(p)
        p.expect(")")
        return inner
    if tok.kind == "ident":
        p.next()
        if tok.text == "tt":
            return hml.NTT
        if tok.text == "ff":
            return hml.NFF
        if tok.text == "nu":
            raise p.error("a nu-binder inside an operand must be parenthesized", tok)
        return hml.NVar(tok.text)
    if tok.kind == "!":
        raise p.error("negation is not allowed in greatest-fixpoint formulas")
    raise p.error("expected a formula")


def print_nu(psi: hml.NuFormula) -> str:
    return _show_nu(psi)[0]


def _show_nu(psi: hml.NuFormula) -> tuple[str, int]:
    match psi:
        case hml.NTt():
            return "tt", _UNARY
        case hml.NFf():
            return "ff", _UNARY
        case hml.NVar(name):
            return name, _UNARY
        case hml.NAnd(items):
            if len(items) < 2:
                return _show_nu(items[0]) if items else ("tt", _UNARY)
            return " & ".join(_wrap_nu(i, _UNARY) for i in items), _AND
        case hml.NOr(items):
            if len(items) < 2:
                return _show_nu(items[0]) if items else ("ff", _UNARY)
            return " | ".join(_wrap_nu(i, _AND) for i in items), _OR
        case hml.NDia(e, body):
            return f"<{e}>{_wrap_nu(body, _UNARY)}", _UNARY
        case hml.NBox(e, body):
            return f"[{e}]{_wrap_nu(body, _UNARY)}", _UNARY
        case hml.Nu(var, body):
            return f"nu {var} . {print_nu(body)}", _NU
    raise TypeError(f"not a nu-formula: {psi!r}")


def _wrap_nu(psi: hml.NuFormula, need: int) -> str:
    text, prec = _show_nu(psi)
    return text if prec >= need else f"({text})"


# process terms -------------------------------------------------------------------


def parse_term(text: str) -> mpa.Term:
    p = _Parser(text)
    return p.finish(_term_sum(p))


def _term_sum(p: _Parser) -> mpa.Term:
    start = p.peek
    left = _term_prefix(p)
    if p.peek.kind != "+":
        return left
    _check_summand(p, left, start)
    while p.peek.kind == "+":
        p.next()
        tok = p.peek
        right = _term_prefix(p)
        _check_summand(p, right, tok)
        left = mpa.Sum(left, right)
    return left


def _check_summand(p: _Parser, term: mpa.Term, tok: Token) -> None:
    if isinstance(term, (mpa.Nil, mpa.Bot)):
        raise p.error(f"{print_term(term)} cannot be a summand", tok)


def _term_prefix(p: _Parser) -> mpa.Term:
    tok = p.peek
    if tok.kind == "0":
        p.next()
        return mpa.NIL
    if tok.kind == "(":
        p.next()
        inner = _term_sum(p)
        p.expect(")")
        return inner
    if tok.kind == "ident":
        p.next()
        if tok.text == "bot":
            return mpa.BOT
        mark = p.peek
        if mark.kind not in ("!", "?"):
            raise p.error("expected '!' or '?' after an event name")
        p.next()
        p.expect(".")
        body = _term_prefix(p)
        return mpa.MustPrefix(tok.text, body) if mark.kind == "!" else mpa.MayPrefix(tok.text, body)
    raise p.error("expected a term")


def print_term(t: mpa.Term) -> str:
    match t:
        case mpa.Nil():
            return "0"
        case mpa.Bot():
            return "bot"
        case mpa.MustPrefix(e, body):
            return f"{e}!.{_term_operand(body)}"
        case mpa.MayPrefix(e, body):
            return f"{e}?.{_term_operand(body)}"
        case mpa.Sum(left, right):
            return f"{print_term(left)} + {_term_operand(right)}"
    raise TypeError(f"not a term: {t!r}")


def _term_operand(t: mpa.Term) -> str:
    text = print_term(t)
    return f"({text})" if isinstance(t, mpa.Sum) else text


PARSERS: dict[str, Callable[[str], object]] = {
    "system": parse_system,
    "formula": parse_formula,
    "nu": parse_nu,
    "term": parse_term,
}
