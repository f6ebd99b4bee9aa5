"""Refinement, logic and distances for modal and mixed transition systems."""

from mtskit.core import (
    AlphabetMismatch,
    EventAlphabet,
    MixedSystem,
    ModalSystem,
    NotModal,
    PointedSystem,
    disjoint_union,
    modal_system,
    must_projection,
    reachable,
    validate,
)
from mtskit.refinement import INFINITY, refinement_equivalent, refines
from mtskit.syntax import ParseError, parse_formula, parse_nu, parse_system, parse_term

__all__ = [
    "AlphabetMismatch",
    "EventAlphabet",
    "INFINITY",
    "MixedSystem",
    "ModalSystem",
    "NotModal",
    "ParseError",
    "PointedSystem",
    "disjoint_union",
    "fixture",
    "modal_system",
    "must_projection",
    "parse_formula",
    "parse_nu",
    "parse_system",
    "parse_term",
    "reachable",
    "refinement_equivalent",
    "refines",
    "validate",
]


def fixture(name: str) -> PointedSystem:
    """Load one of the bundled example systems, e.g. ``fixture("bar")``."""
    from importlib.resources import files

    return parse_system(files("mtskit").joinpath("fixtures", f"{name}.mts").read_text(encoding="utf-8"))
