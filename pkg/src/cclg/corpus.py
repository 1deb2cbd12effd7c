"""Seeded formula generators for differential tests and benchmarks.

Two families: plain first-order descriptions (equations under
conjunction and disjunction, negation only on the equations) and
one-binder node predicates whose equations only mention atoms on the
right, padded with reducible applications so normalization has work
to do.
"""

from __future__ import annotations

import random

from .terms import (
    BOOL,
    And,
    Apply,
    ApplyPath,
    Atom,
    FsVar,
    LamFs,
    LamTyped,
    Or,
    Term,
    TypedVar,
    path_eq,
)

DEFAULT_FEATURES = ("f", "g", "h")
DEFAULT_ATOMS = ("a", "b", "c")


def _path(rng: random.Random, features, max_len: int, min_len: int = 0):
    return tuple(rng.choice(features)
                 for _ in range(rng.randint(min_len, max_len)))


def random_leaf(rng: random.Random, variables, features=DEFAULT_FEATURES,
                atoms=DEFAULT_ATOMS, max_depth: int = 3,
                p_negate: float = 0.2) -> Term:
    """One equation; sides are variables, paths, or atoms."""
    negated = rng.random() < p_negate
    lhs = FsVar(rng.choice(variables))
    lpath = _path(rng, features, max_depth)
    if rng.random() < 0.55:
        rhs: object = Atom(rng.choice(atoms))
        rpath = ()
    else:
        rhs = FsVar(rng.choice(variables))
        rpath = _path(rng, features, max_depth)
    if lpath and not rpath and rng.random() < 0.08:
        lhs = Atom(rng.choice(atoms))
    return path_eq(lhs, lpath, rhs, rpath, negated=negated)


def _tree(rng: random.Random, size: int, leaf, p_and: float) -> Term:
    if size <= 1:
        return leaf()
    split = rng.randint(1, size - 1)
    left = _tree(rng, split, leaf, p_and)
    right = _tree(rng, size - split, leaf, p_and)
    return And(left, right) if rng.random() < p_and else Or(left, right)


def random_first_order(rng: random.Random, n_vars: int = 4,
                       features=DEFAULT_FEATURES, atoms=DEFAULT_ATOMS,
                       size: int = 8, max_depth: int = 3,
                       p_negate: float = 0.2, p_and: float = 0.55) -> Term:
    """A closed-by-convention boolean description over free variables."""
    variables = tuple(f"v{i}" for i in range(1, max(n_vars, 1) + 1))
    return _tree(rng, size,
                 lambda: random_leaf(rng, variables, features, atoms,
                                     max_depth, p_negate),
                 p_and)


def random_positive_first_order(rng: random.Random, **kw) -> Term:
    kw.setdefault("p_negate", 0.0)
    return random_first_order(rng, **kw)


def random_witness_term(rng: random.Random, features=DEFAULT_FEATURES,
                        atoms=DEFAULT_ATOMS, size: int = 6,
                        max_depth: int = 3, p_negate: float = 0.2,
                        p_redex: float = 0.4) -> Term:
    """A one-binder predicate, sprinkled with beta-redexes.

    The normal form compares paths from the binder against atoms only,
    so a deep-enough finite universe decides its satisfiability.
    """
    root = "s"

    def leaf() -> Term:
        lpath = _path(rng, features, max_depth)
        negated = rng.random() < p_negate
        rhs = Atom(rng.choice(atoms))
        if lpath and rng.random() < p_redex:
            # route the first step through an applied abstraction
            inner = path_eq(FsVar("w"), lpath[1:], rhs, negated=negated)
            return ApplyPath(LamFs("w", inner), FsVar(root), (lpath[0],))
        return path_eq(FsVar(root), lpath, rhs, negated=negated)

    body = _tree(rng, size, leaf, 0.55)
    if rng.random() < p_redex:
        body = Apply(LamTyped("z", BOOL, TypedVar("z", BOOL)), body)
    return LamFs(root, body)
