"""Type inference for surface expressions and core terms."""
import random

import pytest
from hypothesis import given, settings, strategies as st

from cclg import corpus
from cclg.dsl import parse_sem, parse_type
from cclg.terms import (
    Arrow, BOOL, Bool, FsArrow, LamFs, beta_normalize, term_text,
)
from cclg.typecheck import (
    CoreTypeError, TypeCheckError, check_entry, infer_term, show_type,
    term_types_resolved, type_of, well_typed,
)


def hi_terms():
    return st.integers(min_value=0, max_value=10**6).map(
        lambda seed: corpus.random_witness_term(random.Random(seed)))


def test_parse_type_round_trip():
    t = parse_type("(fs -> bool) -> fs -> bool")
    assert t == Arrow(FsArrow(BOOL), FsArrow(BOOL))
    assert show_type(t) == "(fs -> bool) -> fs -> bool"


def test_infer_simple_predicate():
    t, ty = infer_term(parse_sem(r"\s. s.reln=run & s.arg1=john"))
    assert ty == FsArrow(BOOL)
    assert isinstance(t, LamFs)
    assert term_types_resolved(t)


def test_infer_second_order():
    src = r"\P.\s. P john s"
    # alone, the subject leaves metas open; an expected type resolves them
    _t, ty = infer_term(parse_sem(src))
    assert "?" in show_type(ty)
    want = Arrow(FsArrow(FsArrow(BOOL)), FsArrow(BOOL))
    t, ty = infer_term(parse_sem(src), want)
    assert ty == want
    assert well_typed(t)


def test_infer_against_expected():
    expected = Arrow(FsArrow(BOOL), FsArrow(BOOL))
    t, ty = infer_term(parse_sem(r"\V.\s. V s"), expected)
    assert ty == expected


def test_expected_mismatch_raises():
    with pytest.raises(TypeCheckError):
        infer_term(parse_sem(r"\s. s.f=a"), Arrow(BOOL, BOOL))


def test_unresolved_polymorphism_rejected():
    # the identity abstraction alone does not pin its argument type
    with pytest.raises(TypeCheckError):
        check_entry("lex id", None, parse_sem(r"\X. X"))


def test_check_entry_labels_errors():
    with pytest.raises(TypeCheckError) as exc:
        check_entry("lex bad", FsArrow(BOOL), parse_sem(r"\s. s & s.f=a"))
    assert "lex bad" in str(exc.value)


def test_check_entry_accepts_and_resolves():
    t = check_entry("lex runs", FsArrow(BOOL),
                    parse_sem(r"\x. x.reln=run"))
    assert type_of(t) == FsArrow(BOOL)


def test_type_of_core_term():
    t, _ = infer_term(parse_sem(r"\s. ~(s.f=a) | s.g=b"))
    assert type_of(t) == FsArrow(BOOL)


def test_type_of_rejects_ill_typed():
    t, _ = infer_term(parse_sem(r"\s. s.f=a"))
    from cclg.terms import Apply
    with pytest.raises(CoreTypeError):
        type_of(Apply(t, t))  # fs->bool applied to fs->bool


@settings(max_examples=80)
@given(hi_terms())
def test_subject_reduction(t):
    # normalization preserves the inferred type exactly
    ty = type_of(t)
    assert type_of(beta_normalize(t)) == ty


@settings(max_examples=60)
@given(hi_terms())
def test_generated_terms_well_typed(t):
    assert well_typed(t)
    assert type_of(t) == FsArrow(BOOL)
