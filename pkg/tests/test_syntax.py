import random

import pytest

from mtskit import fixture, hml, mpa
from mtskit.core import EventAlphabet
from mtskit.syntax import (
    ParseError,
    parse_formula,
    parse_nu,
    parse_system,
    parse_term,
    print_formula,
    print_nu,
    print_system,
    print_term,
)
from mtskit.testkit import GenParams, random_formula, random_modal_system, random_term

FIG1_TEXT = fixture("bar").system and print_system(fixture("bar"))


def test_bar_file_parses_to_three_states():
    p = fixture("bar")
    assert len(p.system.states) == 3 and p.init == "Waits"
    assert p.system.alphabet.events == ("newPint", "drinks", "talks", "orders")


def test_print_parse_is_stable():
    for name in ("bar", "bar_two", "mixed", "mixed_normal", "stubbed"):
        text = print_system(fixture(name))
        again = parse_system(text)
        assert print_system(again) == text
        assert again.system.r_a == fixture(name).system.r_a
        assert again.system.r_c == fixture(name).system.r_c


def test_states_line_is_optional():
    p = parse_system("mts modal\nalphabet: a\ninit: s\nmust s a t\n")
    assert p.system.states == ("s", "t")


@pytest.mark.parametrize(
    "text,line,fragment",
    [
        ("", 1, "empty input"),
        ("mts modal\nalphabet:\ninit: s\n", 2, "nonempty"),
        ("mts weird\n", 1, "header"),
        ("mts modal\nalphabet: a\ninit: s\nmust s z s\n", 4, "unknown event"),
        ("mts modal\nalphabet: a\nstates: s\ninit: s\nmay s a t\n", 5, "unknown state"),
        ("mts modal\nalphabet: a\ninit: s\na s a s\n", 4, "expected one of must, may"),
        ("mts mixed\nalphabet: a\ninit: s\nmust s a s\n", 4, "expected one of a, c"),
        ("mts modal\nalphabet: a tt\ninit: s\n", 2, "invalid event"),
        ("mts modal\nalphabet: a\n", 1, "missing init"),
        ("mts modal\nalphabet: a\ninit: s\nmust s a\n", 4, "label source event target"),
    ],
)
def test_system_errors_carry_line_numbers(text, line, fragment):
    with pytest.raises(ParseError) as err:
        parse_system(text)
    assert err.value.line == line
    assert fragment in err.value.message


def test_error_column_points_at_offending_word():
    with pytest.raises(ParseError) as err:
        parse_system("mts modal\nalphabet: a  9x\ninit: s\n")
    assert (err.value.line, err.value.col) == (2, 14)


def test_comments_and_blank_lines_are_ignored():
    p = parse_system("# hi\n\nmts modal  # header\nalphabet: a\ninit: s # start\n")
    assert p.init == "s"


def test_formula_examples():
    phi = parse_formula("<drinks>tt | !<drinks>tt")
    assert phi == hml.disj2(hml.Dia("drinks", hml.TT), hml.Not(hml.Dia("drinks", hml.TT)))
    assert parse_formula("ff") is hml.FF
    assert parse_formula("[a]ff") == hml.box("a", hml.FF)
    assert print_formula(parse_formula("[a](<b>tt & ff)")) == "[a](<b>tt & ff)"


def test_formula_precedence():
    assert parse_formula("<a>tt & <b>tt | tt") == hml.disj2(
        hml.And(hml.Dia("a", hml.TT), hml.Dia("b", hml.TT)), hml.TT
    )
    assert parse_formula("!<a>tt & tt") == hml.And(hml.Not(hml.Dia("a", hml.TT)), hml.TT)


@pytest.mark.parametrize("text", ["<a>", "<a tt", "tt &", "(tt", "tt tt", "<tt>tt", "[a]"])
def test_formula_errors(text):
    with pytest.raises(ParseError):
        parse_formula(text)


def test_formula_error_position():
    with pytest.raises(ParseError) as err:
        parse_formula("tt &\n  ?")
    assert (err.value.line, err.value.col) == (2, 3)


def test_term_examples():
    assert parse_term("bot") is mpa.BOT
    assert parse_term("0") is mpa.NIL
    t = parse_term("a!.b?.0 + c!.bot")
    assert print_term(t) == "a!.b?.0 + c!.bot"
    assert print_term(parse_term("a!.(b!.0 + c?.0)")) == "a!.(b!.0 + c?.0)"


@pytest.mark.parametrize("text", ["a!.0 + 0", "bot + a?.0", "a!.", "a.0", "a!.0 +", "(a!.0"])
def test_term_errors(text):
    with pytest.raises(ParseError):
        parse_term(text)


def test_nu_examples():
    psi = parse_nu("nu X . [a]X & <b>tt")
    assert isinstance(psi, hml.Nu) and psi.var == "X"
    assert print_nu(psi) == "nu X . [a]X & <b>tt"
    assert parse_nu("ff") is hml.NFF
    assert print_nu(parse_nu("<a>(nu Y . [a]Y)")) == "<a>(nu Y . [a]Y)"


def test_random_round_trips():
    rng = random.Random(17)
    ab = EventAlphabet(("a", "b"))
    for _ in range(300):
        t = random_term(rng, ab, 3, 3)
        assert parse_term(print_term(t)) is t
        phi = random_formula(rng, ab, 4)
        assert parse_formula(print_formula(phi)) is phi
        psi = hml.to_nu(phi)
        assert parse_nu(print_nu(psi)) is psi
    for seed in range(50):
        p = random_modal_system(GenParams(states=(1, 6), events=(1, 3)), seed)
        q = parse_system(print_system(p))
        assert (q.system.r_a, q.system.r_c, q.init) == (p.system.r_a, p.system.r_c, p.init)
        psi = hml.characteristic_nu(p)
        assert parse_nu(print_nu(psi)) is psi
