from __future__ import annotations

import pytest

from mtskit import mpa
from mtskit.core import EventAlphabet
from mtskit.syntax import parse_term

AB = EventAlphabet(("a", "b"))


def term_system(text: str, alphabet=AB):
    """The operational-semantics system of a term written in the term grammar."""
    return mpa.operational_semantics(parse_term(text), alphabet)


@pytest.fixture
def sys_of():
    return term_system


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
