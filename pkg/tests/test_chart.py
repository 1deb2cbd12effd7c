"""Chart parsing: edges, readings, interleaving, derivations."""
from importlib import resources

import pytest

from cclg.chart import (
    Binary, ChartError, Lex, Unary, UnknownWordError, combine,
    derivation_text, edge_sem, extract_readings, parse_sentence,
    set_interleaving,
)
from cclg.grammar import BaseCat, parse_category, parse_grammar, upsilon
from cclg.solver import satisfiable
from cclg.terms import Atom, FsVar, alpha_eq, term_text
from cclg.typecheck import type_of


GRAMMARS = resources.files("cclg") / "grammars"


def load_shipped(name):
    return parse_grammar((GRAMMARS / name).read_text(), filename=name)


ENGLISH = load_shipped("english.cclg")
TOY = load_shipped("toy.cclg")

LONG = "a man said that john read a book and mary died".split()


def readings_of(g, sentence, cat="s", **kw):
    chart = parse_sentence(g, sentence.split(), **kw)
    return extract_readings(g, chart, parse_category(g, cat)), chart


# --------------------------------------------------------------------------
# basics on the two-word grammar


def test_toy_chart():
    readings, chart = readings_of(TOY, "john runs")
    assert len(chart.edges) == 3          # john, runs, and the combination
    assert len(readings) == 1
    (r,) = readings
    assert term_text(r.term) == r"\s. s.reln=run & s.arg1=john"
    assert not r.state.is_false
    assert term_text(r.state.residue) == "true"


def test_unknown_word():
    with pytest.raises(UnknownWordError, match="walks"):
        parse_sentence(TOY, ["john", "walks"])
    with pytest.raises(ChartError):
        parse_sentence(TOY, [])


def test_no_spanning_edge():
    readings, chart = readings_of(TOY, "runs john")
    assert readings == []
    assert chart.spanning(BaseCat("s")) == ()


# --------------------------------------------------------------------------
# combine


def test_combine_directions():
    john = ENGLISH.entries_for("john")[0]
    died = ENGLISH.entries_for("died")[0]
    out = combine(ENGLISH, (john.cat, john.sem), (died.cat, died.sem), "app/")
    assert out is not None
    cat, sem = out
    assert cat == BaseCat("s")
    assert type_of(sem) == upsilon(ENGLISH, cat)
    assert satisfiable(sem)
    # an intransitive cannot take its subject from the right
    assert combine(ENGLISH, (died.cat, died.sem),
                   (john.cat, john.sem), "app/") is None
    assert combine(ENGLISH, (died.cat, died.sem),
                   (john.cat, john.sem), "app\\") is None
    with pytest.raises(ChartError):
        combine(ENGLISH, (john.cat, john.sem), (died.cat, died.sem), "app?")


def test_combine_gate_drops_unsatisfiable():
    # "every" requires sg agreement only through its noun; craft a clash
    g = parse_grammar("""
        Base_Categories s = fs -> bool, iv = fs -> fs -> bool, np = s/iv;
        lex john, np, \\P.\\s. P john s & s.reln=walk;
        lex runs, iv, \\x.\\s. s.reln=run & s.arg1=x;
    """)
    john, runs = g.lexicon
    gated = combine(g, (john.cat, john.sem), (runs.cat, runs.sem),
                    "app/", gate=True)
    assert gated is None
    ungated = combine(g, (john.cat, john.sem), (runs.cat, runs.sem), "app/")
    assert ungated is not None and not satisfiable(ungated[1])


# --------------------------------------------------------------------------
# derivations on the sample grammar


def test_john_died_derivation():
    readings, chart = readings_of(ENGLISH, "john died")
    assert len(readings) == 1
    (r,) = readings
    assert derivation_text(r.derivation) == (
        "s [0,2] app/\n"
        "  s/iv [0,1] lex john\n"
        "  iv [1,2] lex died")
    assert len(chart.edges) == 4          # two lex, one unary, one binary


def test_unary_edges_feed_further_combination():
    # the raising rule turns np into (s/np)/(iv/np)
    chart = parse_sentence(ENGLISH, ["john", "died"])
    raised = [e for e in chart.edges if isinstance(e.sref, Unary)]
    assert len(raised) == 1
    assert raised[0].cat == ENGLISH.transformations[0].target
    assert type_of(edge_sem(chart, raised[0].id)) == upsilon(
        ENGLISH, raised[0].cat)


def test_transitive_sentence():
    readings, _ = readings_of(ENGLISH, "every man loves mary")
    assert len(readings) == 1
    (r,) = readings
    m = r.state.model
    root = FsVar("x_1")
    assert m.lookup(root, ("quant",)) == (Atom("all"), ())
    assert m.lookup(root, ("range", "reln")) == (Atom("man"), ())
    assert m.lookup(root, ("scope", "pred", "reln")) == (Atom("love"), ())
    # the object of love is the naming node under the inner quantifier
    obj, rest = m.lookup(root, ("scope", "pred", "arg2"))
    assert rest == () and m.lookup(obj, ("arg1",)) == (Atom("mary"), ())


def test_object_spans_cover_the_verb_phrase():
    # "read a book" must form an iv across tokens 1..4
    chart = parse_sentence(ENGLISH, "john read a book".split())
    cats = {e.cat for e in chart.edges_at(1, 4)}
    assert BaseCat("iv") in cats
    readings = extract_readings(ENGLISH, chart, BaseCat("s"))
    assert len(readings) == 1


def test_subjectless_order_fails():
    readings, _ = readings_of(ENGLISH, "died john")
    assert readings == []


def test_agreement_blocks_reading():
    # "read" accepts any subject; "died" is third person singular, and
    # proper nouns satisfy it, so both still parse; a bare determiner
    # phrase as object of a transitive needs its noun
    readings, _ = readings_of(ENGLISH, "john read a book")
    assert len(readings) == 1


# --------------------------------------------------------------------------
# ambiguity and readings


def test_coordination_is_ambiguous():
    readings, chart = readings_of(ENGLISH, " ".join(LONG))
    assert len(chart.edges) == 68
    assert len(readings) == 2
    for r in readings:
        assert term_text(r.state.residue) == "true"
    # one reading coordinates inside the complement, the other outside
    placements = set()
    for r in readings:
        node, rest = r.state.model.lookup(FsVar("x_1"), ("type",))
        if (node, rest) == (Atom("coord"), ()):
            placements.add("outer")
        else:
            node, rest = r.state.model.lookup(
                FsVar("x_1"), ("scope", "arg2", "type"))
            assert (node, rest) == (Atom("coord"), ())
            placements.add("inner")
    assert placements == {"outer", "inner"}


def test_readings_deduplicate_alpha_equal_semantics():
    readings, chart = readings_of(ENGLISH, "john died")
    sems = [edge_sem(chart, e.id) for e in chart.spanning(BaseCat("s"))]
    assert len(sems) >= len(readings)
    for i, a in enumerate(sems):
        for b in sems[i + 1:]:
            if alpha_eq(a, b):
                break


# --------------------------------------------------------------------------
# interleaving


def test_interleaving_preserves_readings():
    for sentence in ("john died", "every man loves mary", "john read a book",
                     " ".join(LONG)):
        plain, _ = readings_of(ENGLISH, sentence)
        gated, gated_chart = readings_of(ENGLISH, sentence, interleave=True)
        assert len(plain) == len(gated)
        for a, b in zip(plain, gated):
            assert alpha_eq(a.term, b.term)


def test_interleaving_default_toggle():
    try:
        set_interleaving(True)
        chart = parse_sentence(ENGLISH, "john died".split())
        readings = extract_readings(ENGLISH, chart, BaseCat("s"))
        assert len(readings) == 1
    finally:
        set_interleaving(False)
