"""Command-line interface.

Exit status: 0 when a result was computed (whatever it says), 1 for usage,
input or budget errors, 2 when a constructed artifact fails its own
self-check.  Output is a pure function of the arguments and input files;
wall-clock timing is only included when ``--timing`` is given.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from mtskit import hml, metrics, mpa, refinement
from mtskit.core import AlphabetMismatch, EventAlphabet, NotModal, PointedSystem, must_projection
from mtskit.mpa import TermError
from mtskit.syntax import ParseError, parse_formula, parse_system, parse_term, print_system

SCHEMA_VERSION = 1

RESULT_SCHEMA = {
    "type": "object",
    "required": ["schema", "command", "result", "diagnostics"],
    "additionalProperties": False,
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "command": {"type": "array", "items": {"type": "string"}},
        "result": {
            "type": "object",
            "required": ["kind"],
            "properties": {
                "kind": {
                    "enum": [
                        "boolean",
                        "verdict3",
                        "depth",
                        "distance",
                        "estimate",
                        "system",
                        "formula",
                        "term",
                        "none",
                        "error",
                    ]
                },
            },
        },
        "diagnostics": {"type": "array", "items": {"type": "string"}},
        "timing": {"type": "number", "minimum": 0},
    },
}


@dataclass(frozen=True)
class CliResult:
    command: tuple[str, ...]
    result: dict
    diagnostics: tuple[str, ...] = ()
    timing: float | None = None

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "command": list(self.command),
            "result": self.result,
            "diagnostics": list(self.diagnostics),
        }
        if self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> CliResult:
        data = json.loads(text)
        if data.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {data.get('schema')!r}")
        return cls(
            tuple(data["command"]),
            data["result"],
            tuple(data["diagnostics"]),
            data.get("timing"),
        )

    def text(self) -> str:
        r = self.result
        kind = r["kind"]
        if kind == "boolean":
            body = ("yes" if r["value"] else "no") if r.get("style") == "yes/no" else str(r["value"]).lower()
        elif kind == "verdict3":
            body = r["value"]
        elif kind == "depth":
            body = str(r["value"])
        elif kind == "distance":
            body = str(metrics.DyadicDistance.from_json(r["distance"]))
        elif kind == "estimate":
            body = str(metrics.IntervalEstimate.from_json(r["estimate"]))
        elif kind in ("system", "formula", "term"):
            body = r["text"].rstrip("\n")
        else:
            body = r["message"]
        lines = [body] + list(self.diagnostics)
        return "\n".join(lines) + "\n"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: {message}")


# payload helpers -----------------------------------------------------------------


def _yes_no(value: bool) -> dict:
    return {"kind": "boolean", "value": bool(value), "style": "yes/no"}


def _boolean(value: bool) -> dict:
    return {"kind": "boolean", "value": bool(value), "style": "true/false"}


def _distance(value: metrics.DyadicDistance) -> dict:
    return {"kind": "distance", "distance": value.to_json()}


def _estimate(value: metrics.IntervalEstimate) -> dict:
    return {"kind": "estimate", "estimate": value.to_json()}


def _depth(value) -> dict:
    return {"kind": "depth", "value": "inf" if value == refinement.INFINITY else int(value)}


def _text(kind: str, text: str) -> dict:
    return {"kind": kind, "text": text}


# input loading -------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _load(path: str, state: str | None) -> PointedSystem:
    try:
        p = parse_system(_read(path))
    except ParseError as exc:
        raise ParseError(f"{path}: {exc.message}", exc.line, exc.col) from exc
    if state is not None:
        try:
            p = p.at(state)
        except KeyError as exc:
            raise UsageError(f"{path}: unknown state {state!r}") from exc
    return p


def _widen(systems: list[PointedSystem], extra: str | None) -> list[PointedSystem]:
    if extra is None:
        return systems
    alphabet = systems[0].alphabet
    for p in systems[1:]:
        alphabet = alphabet.union(p.alphabet)
    events = extra.replace(",", " ").split()
    if events:
        alphabet = alphabet.union(EventAlphabet.of(events))
    return [p.with_alphabet(alphabet) for p in systems]


def _one(args) -> PointedSystem:
    return _widen([_load(args.file, args.state)], args.widen)[0]


def _two(args) -> tuple[PointedSystem, PointedSystem]:
    p, q = _widen([_load(args.first, args.state), _load(args.second, args.state2)], args.widen)
    return p, q


def _alphabet_for_term(term: mpa.Term, given: str | None, extra=()) -> EventAlphabet:
    if given:
        return EventAlphabet.of(given.replace(",", " ").split())
    events = sorted(mpa.term_events(term) | set(extra))
    if not events:
        raise UsageError("--alphabet is required when the term mentions no events")
    return EventAlphabet.of(events)


# commands ------------------------------------------------------------------------


def cmd_check(args):
    p = _one(args)
    phi = parse_formula(args.formula)
    if args.mode == "3":
        return {"kind": "verdict3", "value": hml.check3(p, phi).value}, ()
    return _boolean(hml.check(p, phi, hml.Mode(args.mode))), ()


def cmd_refines(args):
    a, c = _two(args)
    return _yes_no(refinement.refines(a, c)), ()


def cmd_equiv(args):
    p, q = _two(args)
    return _yes_no(refinement.refinement_equivalent(p, q)), ()


def cmd_depth(args):
    p, q = _two(args)
    return _depth(refinement.equivalence_depth(p, q)), ()


def cmd_distance(args):
    p, q = _two(args)
    return _distance(metrics.distance(p, q)), ()


def cmd_mc_check(args):
    p = _one(args)
    bad = refinement.mix_condition_violations(p.system)
    return _yes_no(not bad), tuple(f"violated by must-transition {s} {e} {t}" for s, e, t in bad)


def cmd_normalize(args):
    return _text("system", print_system(refinement.normalize_mixed(_one(args)))), ()


def cmd_consistent(args):
    p, q = _two(args)
    return _yes_no(refinement.consistency_depth(p, q) == refinement.INFINITY), ()


def cmd_witness(args):
    p, q = _two(args)
    w = refinement.common_refinement(p, q)
    if w is None:
        return {"kind": "none", "message": "no common refinement"}, ()
    text = print_system(w)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        return _text("system", text), (f"written to {args.output}",)
    return _text("system", text), ()


def cmd_c1(args):
    p, q = _two(args)
    return _distance(metrics.c1(p, q)), ()


def cmd_c2(args):
    p, q = _two(args)
    return _estimate(metrics.c2_bounded(p, q, args.depth, args.budget)), ()


def cmd_hausdorff(args):
    p, q = _two(args)
    return _estimate(metrics.hausdorff_bounded(p, q, args.depth, args.budget)), ()


def cmd_unfold(args):
    p = _one(args)
    term = mpa.unfold(p, args.m)
    if args.as_term:
        return _text("term", str(term)), ()
    return _text("system", print_system(mpa.operational_semantics(term, p.alphabet))), ()


def cmd_charformula(args):
    if args.term is not None:
        term = parse_term(args.term)
        return _text("formula", str(mpa.char_formula(term, _alphabet_for_term(term, args.alphabet)))), ()
    if args.file is None or not args.nu:
        raise UsageError("charformula needs --term T, or FILE together with --nu")
    return _text("formula", str(hml.characteristic_nu(_one(args)))), ()


def cmd_probe(args):
    term = parse_term(args.term)
    trace = args.trace.replace(",", " ").split()
    if args.file is None:
        alphabet = _alphabet_for_term(term, args.alphabet, [*trace, args.event])
        return _text("formula", str(mpa.phi_probe(trace, args.event, term, alphabet))), ()
    p = _one(args)
    alphabet = _alphabet_for_term(term, args.alphabet) if args.alphabet else p.alphabet
    phi = mpa.phi_probe(trace, args.event, term, alphabet)
    return _boolean(hml.check(p, phi, hml.Mode.A)), (f"probe {phi}",)


def cmd_distinguish(args):
    a, c = _two(args)
    if refinement.refines(a, c):
        return {"kind": "none", "message": "none: the concrete system refines the abstract one"}, ()
    return _text("formula", str(refinement.distinguishing_formula(a, c))), ()


def cmd_implementation(args):
    return _text("system", print_system(must_projection(_one(args)))), ()


def cmd_is_ltsequiv(args):
    return _yes_no(refinement.is_implementation_equivalent(_one(args))), ()


def cmd_generate(args):
    from mtskit.testkit import GenParams, random_modal_system

    params = GenParams(
        states=(args.states, args.states),
        events=(args.events, args.events),
        must_density=args.must,
        may_density=args.may,
        seed=args.seed,
    )
    return _text("system", print_system(random_modal_system(params))), ()


# parser --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit a JSON result object")
    common.add_argument("--timing", action="store_true", help="include wall-clock seconds (breaks byte-determinism)")
    common.add_argument(
        "--widen",
        nargs="?",
        const="",
        metavar="EVENTS",
        help="union the inputs' alphabets, plus any listed events, before computing",
    )

    parser = _Parser(prog="mtskit", description="Modal and mixed transition system toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def one(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("file")
        sp.add_argument("--state", help="use this state as the initial state")
        sp.set_defaults(func=func)
        return sp

    def two(name, func, help_, first="first", second="second"):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("first", metavar=first.upper())
        sp.add_argument("second", metavar=second.upper())
        sp.add_argument("--state", help="initial state for the first input")
        sp.add_argument("--state2", help="initial state for the second input")
        sp.set_defaults(func=func)
        return sp

    sp = one("check", cmd_check, "model-check an HML formula")
    sp.add_argument("--mode", choices=["a", "c", "3"], default="a")
    sp.add_argument("--formula", required=True)

    two("refines", cmd_refines, "does CONCRETE refine ABSTRACT", "abstract", "concrete")
    two("equiv", cmd_equiv, "refinement equivalence")
    two("depth", cmd_depth, "equivalence depth")
    two("distance", cmd_distance, "dyadic refinement distance")
    one("mc-check", cmd_mc_check, "check the mix condition")
    one("normalize", cmd_normalize, "turn a mixed system into a modal one")
    two("consistent", cmd_consistent, "do the inputs have a common refinement")
    sp = two("witness", cmd_witness, "build a common refinement")
    sp.add_argument("-o", "--output")
    two("c1", cmd_c1, "optimistic consistency measure")
    for name, func in (("c2", cmd_c2), ("hausdorff", cmd_hausdorff)):
        sp = two(name, func, f"{name} estimate over bounded implementation slices")
        sp.add_argument("--depth", type=_positive, required=True)
        sp.add_argument("--budget", type=_positive, default=metrics.DEFAULT_BUDGET)
    sp = one("unfold", cmd_unfold, "depth-m unfolding")
    sp.add_argument("-m", type=_non_negative, required=True)
    sp.add_argument("--as-term", action="store_true")

    sp = sub.add_parser("charformula", parents=[common], help="characteristic formula of a term or system")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--term")
    sp.add_argument("--nu", action="store_true")
    sp.add_argument("--alphabet")
    sp.add_argument("--state")
    sp.set_defaults(func=cmd_charformula)

    sp = sub.add_parser("probe", parents=[common], help="build (and optionally check) a probe formula")
    sp.add_argument("file", nargs="?")
    sp.add_argument("--trace", default="")
    sp.add_argument("--event", required=True)
    sp.add_argument("--term", required=True)
    sp.add_argument("--alphabet")
    sp.add_argument("--state")
    sp.set_defaults(func=cmd_probe)

    two("distinguish", cmd_distinguish, "formula separating ABSTRACT from CONCRETE", "abstract", "concrete")
    one("implementation", cmd_implementation, "must-projection")
    one("is-ltsequiv", cmd_is_ltsequiv, "is the system equivalent to its must-projection")

    sp = sub.add_parser("generate", parents=[common], help="print a seeded random modal system")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--states", type=_positive, default=3)
    sp.add_argument("--events", type=_positive, default=2)
    sp.add_argument("--must", type=float, default=0.25)
    sp.add_argument("--may", type=float, default=0.25)
    sp.set_defaults(func=cmd_generate)
    return parser


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return value


INPUT_ERRORS = (
    UsageError,
    ParseError,
    AlphabetMismatch,
    NotModal,
    TermError,
    hml.UnknownEvent,
    hml.UnboundVariable,
    refinement.MixConditionViolated,
    metrics.BudgetExceeded,
    ValueError,
)


GLOBAL_FLAGS = ("--json", "--timing")


def run(argv: Sequence[str]) -> tuple[int, str, str]:
    """Execute one command; returns (exit status, stdout text, stderr text)."""
    argv = list(argv)
    json_out = "--json" in argv
    # output flags may also precede the subcommand
    lead = 0
    while lead < len(argv) and argv[lead] in GLOBAL_FLAGS:
        lead += 1
    parse_argv = argv[lead:] + argv[:lead]
    try:
        args = build_parser().parse_args(parse_argv)
        started = time.perf_counter()
        payload, diagnostics = args.func(args)
        elapsed = round(time.perf_counter() - started, 6) if args.timing else None
    except SystemExit as exc:  # --help and --version print and stop
        return int(exc.code or 0), "", ""
    except refinement.InternalValidationError as exc:
        return 2, _failure(argv, json_out, f"internal validation failure: {exc}"), f"error: {exc}\n"
    except INPUT_ERRORS as exc:
        return 1, _failure(argv, json_out, str(exc)), f"error: {exc}\n"
    result = CliResult(tuple(argv), payload, tuple(diagnostics), elapsed)
    return 0, (result.to_json() + "\n") if json_out else result.text(), ""


def _failure(argv, json_out: bool, message: str) -> str:
    if not json_out:
        return ""
    return CliResult(tuple(argv), {"kind": "error", "message": message}).to_json() + "\n"


def main(argv: Sequence[str] | None = None) -> int:
    code, out, err = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return code


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
