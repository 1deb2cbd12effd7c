"""Denotational evaluation of descriptions over finite tree universes.

Used as an independent oracle: a description of type fs -> bool denotes
a predicate on feature trees, and rewriting must never change that
predicate.  Trees here are finite approximations of the intended
models; atoms are leaves, inner nodes map a subset of the features to
subtrees.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .terms import (
    And, Apply, ApplyAtom, ApplyPath, Arrow, Atom, Bool, Eq, FsArrow, FsVar,
    LamFs, LamTyped, Not, Or, PathEq, Term, TruthConst, Type, TypedVar,
    beta_normalize, strip_lambda_prefix, subterms,
)


class DenotationError(Exception):
    pass


class UniverseTooShallow(DenotationError):
    """The term speaks about paths longer than the universe is deep."""


@dataclass(frozen=True)
class AtomTree:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class NodeTree:
    children: tuple  # sorted tuple of (feature, tree)

    def __repr__(self) -> str:
        inner = ", ".join(f"{f}: {t!r}" for f, t in self.children)
        return "{" + inner + "}"

    def child(self, feature: str):
        for f, t in self.children:
            if f == feature:
                return t
        return None


EMPTY_NODE = NodeTree(())

UNDEF = object()  # failed subtree extraction


def node_tree(pairs) -> NodeTree:
    return NodeTree(tuple(sorted(pairs)))


def extract(tree, path):
    """Follow a feature path; UNDEF when a step is missing or on an atom."""
    for f in path:
        if not isinstance(tree, NodeTree):
            return UNDEF
        tree = tree.child(f)
        if tree is None:
            return UNDEF
    return tree


@dataclass(frozen=True)
class FiniteUniverse:
    """All trees over the given features and atoms up to a nesting depth."""

    features: tuple
    atoms: tuple
    depth: int

    @property
    def trees(self) -> tuple:
        return self._build()

    def _build(self) -> tuple:
        if not hasattr(self, "_cache"):
            pool: list = [AtomTree(a) for a in self.atoms] + [EMPTY_NODE]
            nodes: list = [EMPTY_NODE]
            for _ in range(self.depth):
                nodes = []
                for combo in itertools.product(
                        [None] + pool, repeat=len(self.features)):
                    pairs = tuple((f, t) for f, t in
                                  zip(self.features, combo) if t is not None)
                    nodes.append(NodeTree(pairs))
                pool = [AtomTree(a) for a in self.atoms] + nodes
            all_trees = tuple([AtomTree(a) for a in self.atoms] + nodes)
            object.__setattr__(self, "_cache", all_trees)
        return self._cache


def _combine(op, a, b):
    if callable(a) or callable(b):
        return lambda v: _combine(op, a(v), b(v))
    return op(a, b)


def _negate(a):
    if callable(a):
        return lambda v: _negate(a(v))
    return 1 - a


def _lift_const(t: Type, value: bool):
    if isinstance(t, Bool):
        return 1 if value else 0
    if isinstance(t, (FsArrow, Arrow)):
        return lambda _v: _lift_const(t.result, value)
    raise DenotationError(f"cannot lift a constant at type {t!r}")


def _ref_value(ref, rho):
    if isinstance(ref, Atom):
        return AtomTree(ref.name)
    if ref.name not in rho:
        raise DenotationError(f"unassigned variable {ref.name}")
    return rho[ref.name]


def eval_denotation(t: Term, rho: dict):
    """The semantic value of a term under an assignment.

    Booleans are 0/1; abstractions are Python callables.  Equations are
    true only when both sides extract to defined, equal trees, so a
    negated equation holds whenever extraction fails.
    """
    if isinstance(t, TruthConst):
        return _lift_const(t.type, t.value)
    if isinstance(t, TypedVar):
        if t.name not in rho:
            raise DenotationError(f"unassigned variable {t.name}")
        return rho[t.name]
    if isinstance(t, And):
        return _combine(min, eval_denotation(t.left, rho),
                        eval_denotation(t.right, rho))
    if isinstance(t, Or):
        return _combine(max, eval_denotation(t.left, rho),
                        eval_denotation(t.right, rho))
    if isinstance(t, Not):
        return _negate(eval_denotation(t.expr, rho))
    if isinstance(t, (Eq, PathEq)):
        if isinstance(t, Eq):
            l = _ref_value(t.lhs, rho)
            r = _ref_value(t.rhs, rho)
        else:
            l = extract(_ref_value(t.lhs, rho), t.path)
            r = extract(_ref_value(t.rhs, rho), t.rpath)
        holds = l is not UNDEF and r is not UNDEF and l == r
        return int(holds != t.negated)
    if isinstance(t, ApplyPath):
        # a missing node flows in as UNDEF so the body's own equations
        # decide the outcome, matching beta-substitution of the path
        f = eval_denotation(t.fun, rho)
        return f(extract(_ref_value(t.base, rho), t.path))
    if isinstance(t, ApplyAtom):
        f = eval_denotation(t.fun, rho)
        return f(AtomTree(t.atom))
    if isinstance(t, Apply):
        f = eval_denotation(t.fun, rho)
        return f(eval_denotation(t.arg, rho))
    if isinstance(t, LamFs):
        return lambda v: eval_denotation(t.body, {**rho, t.binder: v})
    if isinstance(t, LamTyped):
        return lambda v: eval_denotation(t.body, {**rho, t.binder: v})
    raise DenotationError(f"not a term: {t!r}")


def required_depth(t: Term) -> int:
    """Longest feature path the normal form of a term mentions."""
    longest = 0
    for s in subterms(beta_normalize(t)):
        if isinstance(s, PathEq):
            longest = max(longest, len(s.path), len(s.rpath))
        elif isinstance(s, ApplyPath):
            longest = max(longest, len(s.path))
    return longest


def witness_exists(t: Term, universe: FiniteUniverse) -> bool:
    """Whether some tree in the universe satisfies a one-binder predicate.

    Only meaningful for closed predicates whose equations never force a
    cycle (right-hand sides must be atoms); a deep enough universe then
    contains a witness exactly when the predicate is satisfiable.
    """
    if required_depth(t) > universe.depth:
        raise UniverseTooShallow(
            f"term needs depth {required_depth(t)}, universe has "
            f"{universe.depth}")
    f = eval_denotation(beta_normalize(t), {})
    if not callable(f):
        return bool(f)
    return any(f(v) == 1 for v in universe.trees)


def witness_checkable(t: Term) -> bool:
    """Whether witness_exists is a sound satisfiability check for t.

    The term must be closed, take a single node argument, and only
    compare paths against atoms (variable right-hand sides could force
    cyclic trees, which no finite universe contains).
    """
    binders, body = strip_lambda_prefix(beta_normalize(t))
    if len(binders) != 1 or binders[0][1] != "fs":
        return False
    root = binders[0][0]
    for s in subterms(body):
        if isinstance(s, (Apply, ApplyAtom, ApplyPath, TypedVar, LamFs,
                          LamTyped)):
            return False
        if isinstance(s, PathEq):
            if not (isinstance(s.lhs, FsVar) and s.lhs.name == root):
                return False
            if not isinstance(s.rhs, Atom):
                return False
        if isinstance(s, Eq):
            ok_l = isinstance(s.lhs, Atom) or (
                isinstance(s.lhs, FsVar) and s.lhs.name == root)
            if not ok_l or not isinstance(s.rhs, Atom):
                return False
    return True
