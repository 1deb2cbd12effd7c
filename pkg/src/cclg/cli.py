"""Command-line front end.

Subcommands: ``check`` loads a grammar and lists entry types, ``parse``
prints the readings of a sentence, ``models`` shows one reading's
solved form, residue, and minimal models.

Exit codes: 0 success (parse: at least one reading), 1 load or usage
error, 2 missing file, 3 no readings, 4 unknown word.  The environment
variable CCLG_FUEL overrides the solver's step budget.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from functools import reduce

from .chart import ChartError, UnknownWordError, extract_readings, \
    parse_sentence
from .dsl import DslSyntaxError
from .grammar import GrammarError, cat_text, load_grammar, parse_category, \
    upsilon
from .render import canonical_facts, edges_json, forest_dot, render_avm
from .solver import SolverError, external_facts, minimal_models, \
    resolve_internals
from .terms import And, FuelExhausted, TermError, term_text, term_to_json, \
    type_text
from .typecheck import TypeCheckError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_MISSING = 2
EXIT_NO_READINGS = 3
EXIT_UNKNOWN_WORD = 4

_LOAD_ERRORS = (DslSyntaxError, TypeCheckError, GrammarError, TermError,
                OSError)


def _fail(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _load(path: str):
    """Load a grammar or return an exit code."""
    if not os.path.exists(path):
        _fail(f"no such file: {path}")
        return EXIT_MISSING
    try:
        g = load_grammar(path)
    except _LOAD_ERRORS as err:
        _fail(str(err))
        return EXIT_ERROR
    for w in g.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return g


def _readings(g, args, mode: str):
    """Tokenize, parse, and solve; returns (readings, chart) or an exit code."""
    tokens = args.sentence.lower().split()
    if not tokens:
        _fail("empty sentence")
        return EXIT_ERROR
    try:
        target = parse_category(g, args.cat)
    except (DslSyntaxError, GrammarError) as err:
        _fail(str(err))
        return EXIT_ERROR
    try:
        chart = parse_sentence(g, tokens,
                               interleave=getattr(args, "interleave", False),
                               mode=mode)
        readings = extract_readings(g, chart, target, mode=mode)
    except UnknownWordError as err:
        _fail(str(err))
        return EXIT_UNKNOWN_WORD
    except (ChartError, SolverError, FuelExhausted) as err:
        _fail(str(err))
        return EXIT_ERROR
    return readings, chart


def cmd_check(args) -> int:
    g = _load(args.grammar)
    if isinstance(g, int):
        return g
    for t in g.transformations:
        arrow = f"{type_text(upsilon(g, t.source))} -> " \
                f"{type_text(upsilon(g, t.target))}"
        print(f"transformation {cat_text(t.source)} = {cat_text(t.target)} "
              f": {arrow}")
    for e in g.lexicon:
        print(f"lex {e.word}: {cat_text(e.cat)} : "
              f"{type_text(upsilon(g, e.cat))}")
    print(f"{len(g.lexicon)} entries")
    return EXIT_OK


def cmd_parse(args) -> int:
    g = _load(args.grammar)
    if isinstance(g, int):
        return g
    mode = "polynomial" if args.incomplete else "complete"
    out = _readings(g, args, mode)
    if isinstance(out, int):
        return out
    readings, chart = out

    if args.format == "dot":
        print(forest_dot(chart))
    elif args.format == "json":
        doc = {"sentence": chart.tokens,
               "readings": [{"term": term_to_json(r.term),
                             "model": canonical_facts(r.state.model),
                             "residue": term_to_json(r.state.residue)}
                            for r in readings],
               "edges": json.loads(edges_json(chart))}
        print(json.dumps(doc, indent=2))
    else:
        print(f"{len(readings)} reading(s)")
        for i, r in enumerate(readings):
            print(f"reading {i + 1}: {term_text(r.term)}")
            if args.format == "avm":
                print(render_avm(r.state.model).text)
                print(f"residue: {term_text(r.state.residue)}")
                print()
    return EXIT_OK if readings else EXIT_NO_READINGS


def cmd_models(args) -> int:
    g = _load(args.grammar)
    if isinstance(g, int):
        return g
    mode = "polynomial" if args.incomplete else "complete"
    out = _readings(g, args, mode)
    if isinstance(out, int):
        return out
    readings, _chart = out
    if not readings:
        _fail("no readings")
        return EXIT_NO_READINGS
    if not 1 <= args.reading <= len(readings):
        _fail(f"no reading {args.reading} (found {len(readings)})")
        return EXIT_ERROR
    r = readings[args.reading - 1]
    print(f"reading {args.reading}: {term_text(r.term)}")
    print("model:")
    for fact in canonical_facts(r.state.model):
        print(f"  {fact}")
    print(f"residue: {term_text(r.state.residue)}")
    try:
        facts = external_facts(r.state.model)
        resid = resolve_internals(r.state.model, r.state.residue)
        described = reduce(And, facts + [resid]) if facts else resid
        models = minimal_models(described)
    except (SolverError, TermError) as err:
        print(f"minimal models: not computed ({err})")
        return EXIT_OK
    print(f"minimal models: {len(models)}")
    for i, m in enumerate(models):
        print(f"model {i + 1}:")
        for fact in canonical_facts(m):
            print(f"  {fact}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cclg",
        description="Constraint categorial grammars over feature "
                    "descriptions.",
        epilog="Set CCLG_FUEL to override the solver's step budget.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="load a grammar and list entry types")
    c.add_argument("grammar", help="grammar file")
    c.set_defaults(func=cmd_check)

    pr = sub.add_parser("parse", help="parse a sentence and show readings")
    pr.add_argument("grammar", help="grammar file")
    pr.add_argument("sentence", help="whitespace-separated words")
    pr.add_argument("--cat", default="s", help="target category (default s)")
    pr.add_argument("--interleave", action="store_true",
                    help="prune unsatisfiable edges during parsing")
    pr.add_argument("--incomplete", action="store_true",
                    help="skip the disjunctive case split (polynomial mode)")
    pr.add_argument("--format", choices=["avm", "lambda", "json", "dot"],
                    default="lambda")
    pr.set_defaults(func=cmd_parse)

    mo = sub.add_parser("models",
                        help="show one reading's solved form and models")
    mo.add_argument("grammar", help="grammar file")
    mo.add_argument("sentence", help="whitespace-separated words")
    mo.add_argument("--cat", default="s", help="target category (default s)")
    mo.add_argument("--reading", type=int, default=1,
                    help="1-based reading index (default 1)")
    mo.add_argument("--incomplete", action="store_true",
                    help="skip the disjunctive case split (polynomial mode)")
    mo.set_defaults(func=cmd_models)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
