"""Exhaustive DNF checking and minimal-model enumeration."""
import random
from functools import reduce

import pytest
from hypothesis import given, settings, strategies as st

from cclg import corpus
from cclg.dsl import parse_sem
from cclg.solver import (
    BOTTOM, EMPTY_SOLVED, OracleLimit, SolverError, assert_atomic, entails,
    external_facts, minimal_models, oracle_sat, resolve_internals,
)
from cclg.terms import (
    And, Atom, Eq, FsVar, Not, Or, path_eq, reset_fresh_names,
)
from cclg.typecheck import infer_term

from oracles import ind_sat


def T(src):
    t, _ = infer_term(parse_sem(src))
    return t


def fo_terms(**kw):
    return st.integers(min_value=0, max_value=10**6).map(
        lambda seed: corpus.random_first_order(random.Random(seed), **kw))


def pos_terms(**kw):
    return st.integers(min_value=0, max_value=10**6).map(
        lambda seed: corpus.random_positive_first_order(
            random.Random(seed), **kw))


# --------------------------------------------------------------------------
# oracle_sat


def test_oracle_sat_examples():
    x = FsVar("x")
    assert oracle_sat(path_eq(x, ("f",), Atom("a")))
    assert not oracle_sat(And(Eq(x, Atom("a")), Eq(x, Atom("b"))))
    assert oracle_sat(Or(Eq(x, Atom("a")), Eq(x, Atom("b"))))
    assert not oracle_sat(And(Eq(x, Atom("a")),
                              Eq(x, Atom("a"), negated=True)))
    assert oracle_sat(Not(Eq(x, Atom("a"))))


def test_oracle_sat_rejects_higher_order():
    with pytest.raises(SolverError):
        oracle_sat(T(r"\s. s.f=a"))


def test_oracle_sat_width_limit():
    x = FsVar("x")
    wide = Eq(x, Atom("a"))
    for i in range(14):
        wide = And(wide, Or(Eq(x, Atom("a")), Eq(x, Atom("b"))))
    with pytest.raises(OracleLimit):
        oracle_sat(wide)
    assert oracle_sat(wide, width_limit=2 ** 15)


@settings(max_examples=200, deadline=None)
@given(fo_terms())
def test_oracle_sat_matches_independent_expansion(t):
    reset_fresh_names()
    assert oracle_sat(t) == ind_sat(t)


# --------------------------------------------------------------------------
# entails


def test_entails_examples():
    x, y = FsVar("x"), FsVar("y")
    stronger = assert_atomic(
        assert_atomic(EMPTY_SOLVED, path_eq(x, ("f",), Atom("a"))),
        path_eq(x, ("g",), Atom("b")))
    weaker = assert_atomic(EMPTY_SOLVED, path_eq(x, ("f",), Atom("a")))
    assert entails(stronger, weaker)
    assert not entails(weaker, stronger)
    assert entails(weaker, EMPTY_SOLVED)
    other = assert_atomic(EMPTY_SOLVED, path_eq(y, ("f",), Atom("a")))
    assert not entails(weaker, other)


def test_entails_is_reflexive_and_transitive_on_chain():
    x = FsVar("x")
    chain = [EMPTY_SOLVED]
    for i, f in enumerate(("f", "g", "h")):
        chain.append(assert_atomic(chain[-1], path_eq(x, (f,), Atom("a"))))
    for i, m in enumerate(chain):
        assert entails(m, m)
        for weaker in chain[:i]:
            assert entails(m, weaker) and not entails(weaker, m)


# --------------------------------------------------------------------------
# minimal_models


def test_minimal_models_drops_entailed_disjunct():
    x = FsVar("x")
    e = And(path_eq(x, ("f",), Atom("a")),
            Or(path_eq(x, ("f",), Atom("a")),
               path_eq(x, ("g",), Atom("b"))))
    models = minimal_models(e)
    assert len(models) == 1
    m = models[0]
    assert m.lookup(x, ("f",)) == (Atom("a"), ())
    assert m.lookup(x, ("g",))[1] == ("g",)   # g never got forced


def test_minimal_models_keeps_incomparable_disjuncts():
    x = FsVar("x")
    e = Or(path_eq(x, ("f",), Atom("a")), path_eq(x, ("g",), Atom("b")))
    assert len(minimal_models(e)) == 2


def test_minimal_models_unsat_is_empty():
    x = FsVar("x")
    assert minimal_models(And(Eq(x, Atom("a")), Eq(x, Atom("b")))) == []


def test_minimal_models_rejects_negation():
    with pytest.raises(SolverError):
        minimal_models(Eq(FsVar("x"), Atom("a"), negated=True))


@settings(max_examples=120, deadline=None)
@given(pos_terms(size=6))
def test_minimal_models_form_an_antichain(t):
    reset_fresh_names()
    models = minimal_models(t)
    for i, m1 in enumerate(models):
        for j, m2 in enumerate(models):
            if i != j:
                assert not entails(m1, m2)


@settings(max_examples=100, deadline=None)
@given(pos_terms(size=6))
def test_minimal_models_equivalent_to_input(t):
    reset_fresh_names()
    models = minimal_models(t)
    assert bool(models) == ind_sat(t)
    if not models:
        return
    # the disjunction of the models' facts says exactly what t says
    disjuncts = []
    for m in models:
        facts = external_facts(m)
        disjuncts.append(reduce(And, facts) if facts else T("true"))
    cover = reduce(Or, disjuncts)
    assert not ind_sat(And(t, Not(cover)))
    assert not ind_sat(And(cover, Not(t)))
