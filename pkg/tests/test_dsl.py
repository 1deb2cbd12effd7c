"""Surface syntax: lexing, precedence, statements, printing round trips."""
import random

import pytest
from hypothesis import given, settings, strategies as st

from cclg import corpus
from cclg.dsl import (
    DslSyntaxError, SAnd, SApp, SBaseDecl, SCatBackslash, SCatName, SCatSlash,
    SEq, SLam, SLex, SMacro, SMacroDef, SNot, SOr, SRef, STransform, STruth,
    parse_cat, parse_grammar_source, parse_sem, parse_type,
)
from cclg.terms import alpha_eq, term_text
from cclg.typecheck import infer_term


def fo_terms():
    return st.integers(min_value=0, max_value=10**6).map(
        lambda seed: corpus.random_first_order(random.Random(seed)))


# --------------------------------------------------------------------------
# expression parsing


def test_equation_and_paths():
    e = parse_sem("x.agr.pers=p3")
    assert isinstance(e, SEq) and not e.negated
    assert e.lhs == SRef("x", ("agr", "pers"), e.lhs.pos)


def test_negated_equation_lexing():
    e = parse_sem(r"x.f\=a")
    assert isinstance(e, SEq) and e.negated
    # a lone backslash still opens a lambda
    lam = parse_sem(r"\x. x=a")
    assert isinstance(lam, SLam)


def test_precedence_layers():
    # ~ binds tighter than &, & tighter than |
    e = parse_sem("~x=a & y=b | z=c")
    assert isinstance(e, SOr)
    assert isinstance(e.left, SAnd)
    assert isinstance(e.left.left, SNot)


def test_connectives_associate_right():
    e = parse_sem("x=a & y=b & z=c")
    assert isinstance(e, SAnd) and isinstance(e.right, SAnd)
    assert isinstance(e.left, SEq)
    o = parse_sem("x=a | y=b | z=c")
    assert isinstance(o, SOr) and isinstance(o.right, SOr)


def test_application_left_associative():
    e = parse_sem(r"\F.\x.\s. F x s")
    body = e.body.body.body
    assert isinstance(body, SApp) and isinstance(body.fun, SApp)


def test_lambda_chains():
    a = parse_sem(r"\X\Y. X=Y")
    b = parse_sem(r"\X. \Y. X=Y")
    ta, _ = infer_term(a)
    tb, _ = infer_term(b)
    assert alpha_eq(ta, tb)


def test_truth_literals_reserved():
    assert isinstance(parse_sem("true"), STruth)
    assert isinstance(parse_sem("false"), STruth)
    with pytest.raises(DslSyntaxError):
        parse_sem("true.f=a")


def test_digit_initial_identifiers():
    e = parse_sem(r"\s. 3RD_SG s")
    assert isinstance(e.body, SApp)
    with pytest.raises(DslSyntaxError):
        parse_sem("_hidden=a")


def test_macro_call_spelling():
    # macro syntax is live only for names declared as macros
    src = r"\x. CN(man, 3RD_SG) x"
    e = parse_sem(src, macro_names={"CN", "3RD_SG"})
    assert isinstance(e.body.fun, SMacro)
    assert e.body.fun.name == "CN" and len(e.body.fun.args) == 2
    with pytest.raises(DslSyntaxError):
        parse_sem(src)


def test_error_carries_position():
    with pytest.raises(DslSyntaxError) as exc:
        parse_sem("x=a &")
    msg = str(exc.value)
    assert "1:" in msg or "line 1" in msg


# --------------------------------------------------------------------------
# categories and statements


def test_category_parsing():
    c = parse_cat(r"(s/np)/(iv/np)")
    assert isinstance(c, SCatSlash)
    assert isinstance(c.result, SCatSlash) and isinstance(c.arg, SCatSlash)
    b = parse_cat(r"np\s")
    assert isinstance(b, SCatBackslash)
    assert isinstance(parse_cat("np"), SCatName)


def test_statement_kinds():
    src = r"""
    % a comment
    Base_Categories
        s = fs -> bool,
        iv = fs -> fs -> bool,
        np = s/iv;
    transformation
        np = (s/np)/(iv/np) : \S \Vt \C. S (Vt C);
    let M(X) = \s. X s;
    lex john, np, \P.\s. P john s;
    """
    stmts = parse_grammar_source(src)
    kinds = [type(s).__name__ for s in stmts]
    assert kinds == ["SBaseDecl", "STransform", "SMacroDef", "SLex"]
    decl = stmts[0]
    names = [item[0] for item in decl.items]
    assert names == ["s", "iv", "np"]


def test_published_grammar_parses_and_counts():
    import importlib.resources as ir
    src = (ir.files("cclg") / "grammars" / "english_verbatim.cclg").read_text()
    stmts = parse_grammar_source(src, "english_verbatim.cclg")
    decls = [s for s in stmts if isinstance(s, SBaseDecl)]
    assert len(decls) == 1 and len(decls[0].items) == 8
    assert sum(isinstance(s, STransform) for s in stmts) == 1
    assert sum(isinstance(s, SMacroDef) for s in stmts) == 10
    assert sum(isinstance(s, SLex) for s in stmts) == 16


def test_missing_semicolon_is_an_error():
    with pytest.raises(DslSyntaxError):
        parse_grammar_source("lex john, np, \\P.\\s. P john s")


# --------------------------------------------------------------------------
# printing round trip


@settings(max_examples=100)
@given(fo_terms())
def test_term_text_reparses_closed(t):
    # free lowercase names read back as atoms, so close the formula first
    from cclg.terms import LamFs, free_vars
    closed = t
    for name in sorted(free_vars(t)[0], reverse=True):
        closed = LamFs(name, closed)
    back, _ = infer_term(parse_sem(term_text(closed)))
    assert alpha_eq(back, closed)


@settings(max_examples=60)
@given(st.integers(min_value=0, max_value=10**6))
def test_witness_term_text_reparses(seed):
    t = corpus.random_witness_term(random.Random(seed))
    back, _ = infer_term(parse_sem(term_text(t)))
    assert alpha_eq(back, t)
