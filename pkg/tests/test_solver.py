"""Constraint solving: solved forms, factoring, completeness, termination."""
import random
import re
from functools import reduce

import pytest
from hypothesis import given, settings, strategies as st

from cclg import corpus
from cclg.dsl import parse_sem
from cclg.solver import (
    BOTTOM, EMPTY_SOLVED, SolverError, assert_atomic, check_negative,
    external_facts, is_bottom, m_dependent, resolve_internals, satisfiable,
    solve,
)
from cclg.terms import (
    And, Atom, Eq, FsVar, FuelExhausted, LamFs, Not, free_vars,
    is_basic_normal, path_eq, reset_fresh_names, substitute, term_text,
)
from cclg.typecheck import infer_term

from oracles import (
    UFClash, UnionFind, ind_basic_normal, ind_m_dependent, ind_sat,
    uf_assert, uf_entails_fact,
)


def fo_terms(**kw):
    return st.integers(min_value=0, max_value=10**6).map(
        lambda seed: corpus.random_first_order(random.Random(seed), **kw))


def positive_conjunctions():
    def build(seed):
        rng = random.Random(seed)
        return [corpus.random_leaf(rng, ["v1", "v2", "v3"],
                                   max_depth=2, p_negate=0.0)
                for _ in range(rng.randint(1, 7))]
    return st.integers(min_value=0, max_value=10**6).map(build)


def T(src):
    t, _ = infer_term(parse_sem(src))
    return t


# --------------------------------------------------------------------------
# assert_atomic against the union-find reference


def test_assert_single_equation():
    m = assert_atomic(EMPTY_SOLVED, Eq(FsVar("x"), Atom("a")))
    assert m.canon(FsVar("x")) == Atom("a")


def test_assert_functionality_clash():
    m = assert_atomic(EMPTY_SOLVED, path_eq(FsVar("x"), ("f",), Atom("a")))
    m = assert_atomic(m, path_eq(FsVar("x"), ("f",), Atom("b")))
    assert m is BOTTOM


def test_assert_propagates_through_equality():
    m = EMPTY_SOLVED
    m = assert_atomic(m, Eq(FsVar("x"), FsVar("y")))
    m = assert_atomic(m, path_eq(FsVar("y"), ("f",), Atom("a")))
    m = assert_atomic(m, path_eq(FsVar("x"), ("f",), FsVar("z")))
    assert m is not BOTTOM
    assert m.canon(FsVar("z")) == Atom("a")


def test_assert_atom_feature_clash():
    m = assert_atomic(EMPTY_SOLVED, Eq(FsVar("x"), Atom("a")))
    assert assert_atomic(m, path_eq(FsVar("x"), ("f",), Atom("b"))) is BOTTOM


def test_assert_atoms_never_unite():
    assert assert_atomic(EMPTY_SOLVED, Eq(Atom("a"), Atom("b"))) is BOTTOM
    m = assert_atomic(EMPTY_SOLVED, Eq(Atom("a"), Atom("a")))
    assert m is not BOTTOM


@settings(max_examples=120)
@given(positive_conjunctions())
def test_assert_agrees_with_union_find(cs):
    reset_fresh_names()
    m = EMPTY_SOLVED
    for c in cs:
        m = assert_atomic(m, c)
        if m is BOTTOM:
            break
    uf = UnionFind()
    clashed = False
    try:
        for c in cs:
            uf_assert(uf, c)
    except UFClash:
        clashed = True
    assert (m is BOTTOM) == clashed


@settings(max_examples=120)
@given(positive_conjunctions())
def test_solved_form_invariants(cs):
    reset_fresh_names()
    m = EMPTY_SOLVED
    for c in cs:
        m = assert_atomic(m, c)
        if m is BOTTOM:
            return
        # no equality chains, and every feature row lives on a canonical var
        for tgt in m.equalities.values():
            if not isinstance(tgt, Atom):
                assert tgt.name not in m.equalities
        for (x, _f), v in m.features.items():
            assert x not in m.equalities
            assert m.canon(v) == v


@settings(max_examples=100)
@given(positive_conjunctions())
def test_asserted_facts_are_entailed(cs):
    reset_fresh_names()
    m = EMPTY_SOLVED
    for c in cs:
        m = assert_atomic(m, c)
        if m is BOTTOM:
            return
    for fact in external_facts(m):
        assert uf_entails_fact(cs, fact), term_text(fact)


# --------------------------------------------------------------------------
# negatives and M-dependence


def test_check_negative_triple():
    m = assert_atomic(EMPTY_SOLVED, path_eq(FsVar("x"), ("f",), Atom("a")))
    violated = path_eq(FsVar("x"), ("f",), Atom("a"), negated=True)
    consistent = path_eq(FsVar("x"), ("f",), Atom("b"), negated=True)
    undetermined = path_eq(FsVar("x"), ("g",), Atom("a"), negated=True)
    assert check_negative(m, violated) == "violated"
    assert check_negative(m, consistent) == "consistent"
    assert check_negative(m, undetermined) == "undetermined"


def test_check_negative_blocked_path_is_consistent():
    m = assert_atomic(EMPTY_SOLVED, path_eq(FsVar("x"), ("f",), Atom("a")))
    blocked = path_eq(FsVar("x"), ("f", "g"), Atom("b"), negated=True)
    assert check_negative(m, blocked) == "consistent"


def test_m_dependent_examples():
    m = assert_atomic(EMPTY_SOLVED, path_eq(FsVar("x"), ("f",), FsVar("z")))
    c1 = path_eq(FsVar("x"), ("g",), Atom("a"))
    c2 = path_eq(FsVar("z"), ("h",), Atom("b"))
    c3 = path_eq(FsVar("y"), ("h",), Atom("b"))
    assert m_dependent(m, c1, c2)          # x reaches z through the model
    assert not m_dependent(m, c2, c3)
    assert not m_dependent(EMPTY_SOLVED, c1, c2)


@settings(max_examples=80)
@given(positive_conjunctions(), fo_terms(size=3), fo_terms(size=3))
def test_m_dependent_matches_naive_closure(cs, c1, c2):
    reset_fresh_names()
    m = EMPTY_SOLVED
    for c in cs:
        m = assert_atomic(m, c)
        if m is BOTTOM:
            return
    # the naive closure works over raw feature rows with canonical names
    c1c, c2c = _canon_names(m, c1), _canon_names(m, c2)
    assert m_dependent(m, c1, c2) == ind_m_dependent(m.features, c1c, c2c)


def _canon_names(m, t):
    fs, _ = free_vars(t)
    for name in fs:
        r = m.canon(FsVar(name))
        if isinstance(r, FsVar) and r.name != name:
            t = substitute(t, name, r)
        elif isinstance(r, Atom):
            t = substitute(t, name, r)
    return t


# --------------------------------------------------------------------------
# solve: worked examples


def test_solve_entailed_disjunct():
    st_ = solve(T(r"\x. x.agr.pers=p3 & (x.agr.pers=p1 | x.cat=v)"))
    assert not st_.is_false
    assert term_text(st_.residue) == "true"
    feats = {(v, f): val for (v, f), val in st_.model.features.items()}
    assert feats[("x_1", "cat")] == Atom("v")


def test_solve_conjoined_false():
    st_ = solve(And(path_eq(FsVar("x"), ("f",), Atom("a")), T("false")))
    assert st_.is_false and is_bottom(st_.model)


def test_solve_atom_clash():
    assert solve(T(r"\x. x=a & x=b")).is_false


def test_solve_keeps_undetermined_negative():
    st_ = solve(T(r"\x. x.f=a & x.g\=b"))
    assert not st_.is_false
    assert st_.negatives and len(st_.negatives) == 1


def test_satisfiable_examples():
    assert satisfiable(T(r"\s. s.reln=run & s.arg1=john"))
    assert not satisfiable(T(r"\s. s.reln=run & s.reln=walk"))


def test_solve_rejects_unknown_mode():
    with pytest.raises(SolverError):
        solve(T("true"), mode="fast")


# --------------------------------------------------------------------------
# solve: regressions


def test_trial_context_does_not_leak_nodes():
    # rewriting a sibling under a trial extension once leaked that trial's
    # fresh internal nodes into the residue and crashed validation
    src = (r"((v2.f.g=v2.h.g & v2.h.f=v2.f.h | v2.f.f.f=b)"
           r" & v2.g.f.h\=v1.g.g.g) & (v2.h.f.h=v2 | v1.g.f.h=c & v3=a)")
    e = _free_formula(src)
    st_ = solve(e)
    assert (not st_.is_false) == ind_sat(e)
    assert is_basic_normal(st_.residue)


def test_alternating_trials_terminate():
    # representative renamings under alternating trial models used to
    # cycle; the measure gate must keep this within fuel
    src = (r"(v2.h.f.g=a | v3.g.g.g=c) | (v3.h.g.g=v1.f.g | v3.g.f=b)"
           r" & v3.g.g=v4.g.f & v3.f.f=v2.f.f"
           r" & ((v1.f=v4 | v3.f=v3.h.g.g) | v1.f\=a)")
    e = _free_formula(src)
    st_ = solve(e)
    assert (not st_.is_false) == ind_sat(e)


def _free_formula(src):
    # parse closed, then strip binders so v-names stay variables
    names = sorted(set(re.findall(r"\bv\d+\b", src)))
    closed = "".join(f"\\{n}. " for n in names) + src
    t, _ = infer_term(parse_sem(closed))
    while isinstance(t, LamFs):
        t = substitute(t.body, t.binder, FsVar(t.binder))
    return t


# --------------------------------------------------------------------------
# solve: properties against the independent oracle


@settings(max_examples=150, deadline=None)
@given(fo_terms())
def test_complete_mode_matches_oracle(t):
    reset_fresh_names()
    st_ = solve(t)
    assert (not st_.is_false) == ind_sat(t)


@settings(max_examples=150, deadline=None)
@given(fo_terms())
def test_residue_is_basic_normal(t):
    reset_fresh_names()
    st_ = solve(t)
    if not st_.is_false:
        assert is_basic_normal(st_.residue)
        assert ind_basic_normal(st_.residue)


@settings(max_examples=120, deadline=None)
@given(fo_terms())
def test_partial_model_facts_entailed(t):
    reset_fresh_names()
    st_ = solve(t)
    if st_.is_false:
        return
    for fact in external_facts(st_.model):
        assert not ind_sat(And(t, Not(fact))), term_text(fact)


@settings(max_examples=100, deadline=None)
@given(fo_terms())
def test_factoring_equivalence(t):
    reset_fresh_names()
    st_ = solve(t)
    if st_.is_false:
        return
    facts = list(external_facts(st_.model))
    recon = reduce(And, facts + [resolve_internals(st_.model, st_.residue)])
    assert not ind_sat(And(t, Not(recon)))
    assert not ind_sat(And(recon, Not(t)))


@settings(max_examples=150, deadline=None)
@given(fo_terms())
def test_polynomial_mode_sound(t):
    reset_fresh_names()
    st_ = solve(t, mode="polynomial")
    if st_.is_false:
        assert not ind_sat(t)


@settings(max_examples=100, deadline=None)
@given(fo_terms(n_vars=5, size=12))
def test_terminates_on_larger_formulas(t):
    reset_fresh_names()
    solve(t)  # must finish within the default fuel


def test_fuel_override(monkeypatch):
    monkeypatch.setenv("CCLG_FUEL", "1")
    with pytest.raises(FuelExhausted):
        solve(T(r"\x. x.f=a & x.g=b & (x.f=b | x.g=a)"))
