"""Constraint solving over feature descriptions.

``solve`` factors a boolean description into a pair of a partial model
(a solved form of atomic constraints every model must satisfy) and a
smaller residue in basic normal form.  The rewrite system underneath is
organized in priority tiers; the distributive tier can be switched off,
trading completeness for polynomial behavior.

The module also houses the two testing oracles: DNF satisfiability and
minimal-model enumeration.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field

from .terms import (
    And, Apply, ApplyAtom, ApplyPath, Arrow, Atom, BOOL, Eq, FALSE, FsArrow,
    FsVar, FuelExhausted, LamFs, LamTyped, Not, Or, PathEq, PathRef, Term,
    TermError, TruthConst, TypedVar, TRUE, apply_path, beta_normalize,
    free_vars, open_description, path_eq, substitute, subterms, term_size,
)


class SolverError(Exception):
    pass


class OracleLimit(SolverError):
    """The input is too wide for exhaustive DNF expansion."""


class _Bottom:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "bottom"


BOTTOM = _Bottom()


def is_bottom(m) -> bool:
    return m is BOTTOM


_INTERNAL_PREFIX = "_p"


def _natural_key(name: str):
    return [int(p) if p.isdigit() else p for p in re.split(r"(\d+)", name)]


# --------------------------------------------------------------------------
# solved forms


@dataclass(frozen=True)
class SolvedForm:
    """Conjunction of atomic constraints in canonical shape.

    ``equalities`` maps each eliminated variable to its canonical
    representative; eliminated names occur nowhere else.  ``features``
    maps (canonical variable, feature) to a canonical reference; atoms
    never carry features.  ``internal`` holds the names invented while
    decomposing paths, and ``counter`` feeds that supply.
    """

    equalities: dict = field(default_factory=dict)
    features: dict = field(default_factory=dict)
    internal: frozenset = field(default_factory=frozenset)
    counter: int = 0

    def canon(self, ref):
        seen = set()
        while isinstance(ref, FsVar) and ref.name in self.equalities:
            if ref.name in seen:
                raise SolverError(f"equality cycle at {ref.name}")
            seen.add(ref.name)
            ref = self.equalities[ref.name]
        return ref

    def lookup(self, ref, path):
        """Follow ``path`` from ``ref`` as far as the model determines it."""
        cur = self.canon(ref)
        consumed = 0
        for f in path:
            if not isinstance(cur, FsVar):
                break
            key = (cur.name, f)
            if key not in self.features:
                break
            cur = self.canon(self.features[key])
            consumed += 1
        return cur, tuple(path[consumed:])

    def is_internal(self, name: str) -> bool:
        return name in self.internal

    def atomic_count(self) -> int:
        return len(self.equalities) + len(self.features)


EMPTY_SOLVED = SolvedForm()


def _validate(m: SolvedForm) -> SolvedForm:
    # eliminated variables occur exactly once; no atom ever owns a feature
    for k, v in m.equalities.items():
        if isinstance(v, FsVar) and v.name in m.equalities:
            raise SolverError(f"equality chain through {k}")
        if isinstance(v, FsVar) and v.name in m.internal \
                and k not in m.internal:
            raise SolverError(f"external {k} eliminated into internal name")
    for (x, f), v in m.features.items():
        if x in m.equalities:
            raise SolverError(f"feature row on eliminated variable {x}")
        if isinstance(v, FsVar) and v.name in m.equalities:
            raise SolverError(f"feature value not canonical: {x}.{f}")
    return m


def _prefer(a, b, internal: set):
    """Pick (keep, eliminate) for a union; eliminate is always a variable."""
    if isinstance(a, Atom):
        return a, b
    if isinstance(b, Atom):
        return b, a
    ai, bi = a.name in internal, b.name in internal
    if ai != bi:
        return (b, a) if ai else (a, b)
    if _natural_key(a.name) <= _natural_key(b.name):
        return a, b
    return b, a


def assert_atomic(m, c: Term):
    """Extend a solved form with one positive equation; Bottom if unsat."""
    if m is BOTTOM:
        return BOTTOM
    if isinstance(c, Eq):
        lhs, lpath, rhs, rpath = c.lhs, (), c.rhs, ()
        negated = c.negated
    elif isinstance(c, PathEq):
        lhs, lpath, rhs, rpath = c.lhs, c.path, c.rhs, c.rpath
        negated = c.negated
    else:
        raise SolverError(f"not an atomic constraint: {c!r}")
    if negated:
        raise SolverError("cannot assert a negative constraint into a model")

    eqs = dict(m.equalities)
    feats = dict(m.features)
    internal = set(m.internal)
    counter = m.counter

    def canon(r):
        while isinstance(r, FsVar) and r.name in eqs:
            r = eqs[r.name]
        return r

    def fresh():
        nonlocal counter
        counter += 1
        name = f"{_INTERNAL_PREFIX}{counter}"
        internal.add(name)
        return FsVar(name)

    pending: list = []

    def walk(base, path):
        """Consume ``path``, inventing internal links except the last.

        Returns ('node', ref) when fully consumed, ('slot', var, feat)
        when the final link is absent, or None when an atom blocks.
        """
        cur = canon(base)
        for i, f in enumerate(path):
            if isinstance(cur, Atom):
                return None
            key = (cur.name, f)
            if key in feats:
                cur = canon(feats[key])
            elif i == len(path) - 1:
                return ("slot", cur, f)
            else:
                nxt = fresh()
                feats[key] = nxt
                cur = nxt
        return ("node", cur)

    def set_feature(var: FsVar, f: str, value):
        key = (var.name, f)
        if key in feats:
            pending.append((feats[key], value))
        else:
            feats[key] = value

    def union_all() -> bool:
        while pending:
            a, b = pending.pop()
            a, b = canon(a), canon(b)
            if a == b:
                continue
            if isinstance(a, Atom) and isinstance(b, Atom):
                return False
            keep, elim = _prefer(a, b, internal)
            if isinstance(keep, Atom) and any(
                    x == elim.name for (x, _f) in feats):
                return False
            eqs[elim.name] = keep
            for k, v in list(eqs.items()):
                if isinstance(v, FsVar) and v.name == elim.name:
                    eqs[k] = keep
            for key, v in list(feats.items()):
                if isinstance(v, FsVar) and v.name == elim.name:
                    feats[key] = keep
            for key in [k for k in feats if k[0] == elim.name]:
                value = feats.pop(key)
                set_feature(keep, key[1], value)
        return True

    # resolve the right side to a single reference
    if not rpath:
        rref = canon(rhs)
    else:
        got = walk(rhs, rpath)
        if got is None:
            return BOTTOM
        if got[0] == "node":
            rref = got[1]
        else:
            _tag, var, f = got
            rref = fresh()
            feats[(var.name, f)] = rref

    if not lpath:
        pending.append((canon(lhs), rref))
    else:
        got = walk(lhs, lpath)
        if got is None:
            return BOTTOM
        if got[0] == "node":
            pending.append((got[1], rref))
        else:
            _tag, var, f = got
            set_feature(var, f, rref)

    if not union_all():
        return BOTTOM
    return _validate(SolvedForm(eqs, feats, frozenset(internal), counter))


def check_negative(m: SolvedForm, c: Term) -> str:
    """Classify a negative equation against the model.

    'violated' when the model already forces the two sides together,
    'consistent' when no model of m can (distinct atoms, or a path
    blocked by an atom), 'undetermined' otherwise.
    """
    if isinstance(c, Eq):
        lhs, lpath, rhs, rpath = c.lhs, (), c.rhs, ()
    elif isinstance(c, PathEq):
        lhs, lpath, rhs, rpath = c.lhs, c.path, c.rhs, c.rpath
    else:
        raise SolverError(f"not an atomic constraint: {c!r}")
    n1, rem1 = m.lookup(lhs, lpath)
    n2, rem2 = m.lookup(rhs, rpath)
    if (isinstance(n1, Atom) and rem1) or (isinstance(n2, Atom) and rem2):
        return "consistent"
    if rem1 or rem2:
        return "undetermined"
    if n1 == n2:
        return "violated"
    if isinstance(n1, Atom) and isinstance(n2, Atom):
        return "consistent"
    return "undetermined"


def m_dependent(m: SolvedForm, c1: Term, c2: Term) -> bool:
    """Whether the two terms can constrain each other through the model."""
    return bool(_var_closure(m, c1) & _var_closure(m, c2))


def _var_closure(m: SolvedForm, c: Term) -> frozenset:
    fs, _typed = free_vars(c)
    names = set()
    for n in fs:
        r = m.canon(FsVar(n))
        if isinstance(r, FsVar):
            names.add(r.name)
    changed = True
    while changed:
        changed = False
        for (x, _f), v in m.features.items():
            if x in names and isinstance(v, FsVar) and v.name not in names:
                names.add(v.name)
                changed = True
    return frozenset(names)


# --------------------------------------------------------------------------
# projecting internals away


def _routes(m: SolvedForm) -> dict:
    """First external access path for every reachable internal node."""
    children: dict = {}
    for (x, f), v in m.features.items():
        children.setdefault(x, []).append((f, v))
    for lst in children.values():
        lst.sort(key=lambda p: p[0])
    routes: dict = {}

    def visit(name: str, root: str, path: tuple) -> None:
        for f, v in children.get(name, ()):
            v = m.canon(v)
            if isinstance(v, FsVar) and m.is_internal(v.name) \
                    and v.name not in routes:
                routes[v.name] = (root, path + (f,))
                visit(v.name, root, path + (f,))

    roots = sorted((x for x in children
                    if not m.is_internal(x) and x not in m.equalities),
                   key=_natural_key)
    for r in roots:
        visit(r, r, ())
    return routes


def external_facts(m: SolvedForm) -> list:
    """The model as equations over its external variables only.

    Internal decomposition variables are folded back into paths; a
    junction reachable along two paths becomes a path-path equation, and
    an internal leaf keeps its definedness as a self-equation.
    """
    if m is BOTTOM:
        return [FALSE]
    routes = _routes(m)
    children: dict = {}
    for (x, f), v in m.features.items():
        children.setdefault(x, []).append((f, v))
    for lst in children.values():
        lst.sort(key=lambda p: p[0])

    facts: list = []
    for k in sorted(m.equalities, key=_natural_key):
        if m.is_internal(k):
            continue
        facts.append(Eq(FsVar(k), m.equalities[k]))

    seen: set = set()

    def visit(name: str, root: str, path: tuple) -> bool:
        emitted = False
        for f, v in children.get(name, ()):
            v = m.canon(v)
            p = path + (f,)
            if isinstance(v, Atom):
                facts.append(path_eq(FsVar(root), p, v))
                emitted = True
            elif not m.is_internal(v.name):
                facts.append(path_eq(FsVar(root), p, v))
                emitted = True
            elif routes[v.name] != (root, p) or v.name in seen:
                r2, p2 = routes[v.name]
                facts.append(path_eq(FsVar(root), p, FsVar(r2), p2))
                emitted = True
            else:
                seen.add(v.name)
                below = visit(v.name, root, p)
                if not below:
                    facts.append(path_eq(FsVar(root), p, FsVar(root), p))
                emitted = True
        return emitted

    roots = sorted((x for x in children
                    if not m.is_internal(x) and x not in m.equalities),
                   key=_natural_key)
    for r in roots:
        visit(r, r, ())

    for x in set(n for (n, _f) in m.features):
        if m.is_internal(x):
            assert x in routes, f"unreachable internal node {x}"
    return facts


def resolve_internals(m: SolvedForm, t: Term) -> Term:
    """Replace free internal variables in a term by their access paths."""
    if m is BOTTOM:
        return t
    routes = _routes(m)
    fs, _typed = free_vars(t)
    for name in sorted(fs, key=_natural_key):
        if m.is_internal(name):
            if name not in routes:
                raise SolverError(f"unreachable internal variable {name}")
            root, path = routes[name]
            t = substitute(t, name, PathRef(FsVar(root), path))
    return t


# --------------------------------------------------------------------------
# the rewrite system


@dataclass
class Fuel:
    left: int

    def spend(self, n: int = 1) -> None:
        self.left -= n
        if self.left < 0:
            raise FuelExhausted(
                "solver exceeded its rewrite budget (internal bug or set "
                "CCLG_FUEL higher)")


def _flatten_and(t: Term) -> list:
    out: list = []
    stack = [t]
    while stack:
        cur = stack.pop()
        if isinstance(cur, And):
            stack.append(cur.right)
            stack.append(cur.left)
        else:
            out.append(cur)
    return out


def _rebuild_and(conjuncts: list) -> Term:
    if not conjuncts:
        return TRUE
    t = conjuncts[-1]
    for c in reversed(conjuncts[:-1]):
        t = And(c, t)
    return t


def _is_atomic(t: Term) -> bool:
    return isinstance(t, (Eq, PathEq))


def _is_positive_atomic(t: Term) -> bool:
    return _is_atomic(t) and not t.negated


def _atom_refs(t: Term):
    if isinstance(t, Eq):
        return (t.lhs, t.rhs)
    return (t.lhs, t.rhs)


def _assertable(t: Term, bound: frozenset) -> bool:
    if not _is_positive_atomic(t):
        return False
    return all(not (isinstance(r, FsVar) and r.name in bound)
               for r in _atom_refs(t))


def _truth(value: bool, t=BOOL) -> TruthConst:
    return TruthConst(value, t)


def _conj_class(t: Term) -> int:
    if isinstance(t, TypedVar):
        return 0
    if isinstance(t, (ApplyPath, ApplyAtom, Apply)):
        return 2
    return 1


def _has_beta_work(t: Term) -> bool:
    if isinstance(t, (ApplyPath, ApplyAtom)):
        return isinstance(t.fun, LamFs) or _has_beta_work(t.fun)
    if isinstance(t, Apply):
        return (isinstance(t.fun, LamTyped) or _has_beta_work(t.fun)
                or _has_beta_work(t.arg))
    if isinstance(t, Not):
        return isinstance(t.expr, (LamFs, LamTyped)) \
            or _has_beta_work(t.expr)
    if isinstance(t, (And, Or)):
        both_fs = isinstance(t.left, LamFs) and isinstance(t.right, LamFs)
        both_ty = (isinstance(t.left, LamTyped)
                   and isinstance(t.right, LamTyped)
                   and t.left.binder_type == t.right.binder_type)
        return both_fs or both_ty \
            or _has_beta_work(t.left) or _has_beta_work(t.right)
    if isinstance(t, (LamFs, LamTyped)):
        return _has_beta_work(t.body)
    return False


def _residue_measure(t: Term) -> tuple:
    """Well-founded size for context rewrites: node count, then paths."""
    paths = 0
    for s in subterms(t):
        if isinstance(s, PathEq):
            paths += len(s.path) + len(s.rpath)
        elif isinstance(s, ApplyPath):
            paths += len(s.path)
    return (term_size(t), paths)


def _resolve_trial_nodes(base: SolvedForm, trial: SolvedForm, t: Term):
    """Replace trial-invented node names in t by access paths.

    Every node the trial created hangs off some feature chain rooted at a
    name the base model already knows; substituting the chain keeps the
    term meaningful after the trial is discarded.  Returns None when a
    leaked name has no such chain, telling the caller to drop the rewrite.
    """
    invented = trial.internal - base.internal
    if not invented:
        return t
    fs, _typed = free_vars(t)
    leaked = fs & invented
    if not leaked:
        return t
    children: dict = {}
    for (x, f), v in trial.features.items():
        children.setdefault(x, []).append((f, v))
    routes: dict = {}
    stack = [(x, x, ()) for x in sorted(children, key=_natural_key)
             if x not in invented and x not in trial.equalities]
    while stack:
        name, root, path = stack.pop()
        for f, v in sorted(children.get(name, ()), key=lambda p: p[0]):
            v = trial.canon(v)
            if isinstance(v, FsVar) and v.name in invented \
                    and v.name not in routes:
                routes[v.name] = (root, path + (f,))
                stack.append((v.name, root, path + (f,)))
    for name in sorted(leaked, key=_natural_key):
        if name not in routes:
            return None
        root, path = routes[name]
        t = substitute(t, name, PathRef(FsVar(root), path))
    return t


def _model_key(m: SolvedForm) -> tuple:
    # the counter is omitted: fresh names invented under a trial never
    # leak (they are resolved to paths or the rewrite is dropped)
    return (tuple(sorted(m.equalities.items())),
            tuple(sorted(m.features.items())),
            m.internal)


class _Rewriter:
    """One-step rewriting of a residue under a solved form."""

    def __init__(self, mode: str, fuel: Fuel):
        self.mode = mode
        self.fuel = fuel
        self._fix_cache: dict = {}

    def step(self, m: SolvedForm, t: Term):
        tiers = [self.tier_beta, self.tier_reorder, self.tier_truth,
                 lambda n, b: self.tier_model(m, n, b)]
        if self.mode == "complete":
            tiers.append(lambda n, b: self.tier_distribute(m, n, b))
        for tier in tiers:
            r = self.scan(tier, t, frozenset())
            if r is not None:
                self.fuel.spend()
                return r
        return None

    def fixpoint(self, m: SolvedForm, t: Term) -> Term:
        # context rules re-normalize siblings under trial models on every
        # outer scan; the cache makes those repeats cheap
        mkey = _model_key(m)
        start = t
        seen: list = []
        while True:
            hit = self._fix_cache.get((mkey, t))
            if hit is not None:
                t = hit
                break
            r = self.step(m, t)
            if r is None:
                break
            seen.append(t)
            t = r
        self._fix_cache[(mkey, start)] = t
        for s in seen:
            self._fix_cache[(mkey, s)] = t
        self._fix_cache[(mkey, t)] = t
        return t

    def scan(self, rule, t: Term, bound: frozenset):
        r = rule(t, bound)
        if r is not None:
            return r
        if isinstance(t, (And, Or)):
            l = self.scan(rule, t.left, bound)
            if l is not None:
                return type(t)(l, t.right)
            rr = self.scan(rule, t.right, bound)
            if rr is not None:
                return type(t)(t.left, rr)
            return None
        if isinstance(t, Not):
            e = self.scan(rule, t.expr, bound)
            return Not(e) if e is not None else None
        if isinstance(t, ApplyPath):
            f = self.scan(rule, t.fun, bound)
            return ApplyPath(f, t.base, t.path) if f is not None else None
        if isinstance(t, ApplyAtom):
            f = self.scan(rule, t.fun, bound)
            return ApplyAtom(f, t.atom) if f is not None else None
        if isinstance(t, Apply):
            f = self.scan(rule, t.fun, bound)
            if f is not None:
                return Apply(f, t.arg)
            a = self.scan(rule, t.arg, bound)
            return Apply(t.fun, a) if a is not None else None
        if isinstance(t, LamFs):
            b = self.scan(rule, t.body, bound | {t.binder})
            return LamFs(t.binder, b) if b is not None else None
        if isinstance(t, LamTyped):
            b = self.scan(rule, t.body, bound | {t.binder})
            return LamTyped(t.binder, t.binder_type, b) \
                if b is not None else None
        return None

    # tier 1: beta redexes and connectives over abstractions

    def tier_beta(self, t: Term, bound: frozenset):
        if isinstance(t, (ApplyPath, ApplyAtom)) \
                and isinstance(t.fun, LamFs):
            return beta_normalize(t)
        if isinstance(t, Apply) and isinstance(t.fun, LamTyped):
            return beta_normalize(t)
        if isinstance(t, Not) and isinstance(t.expr, (LamFs, LamTyped)):
            return beta_normalize(t)
        if isinstance(t, (And, Or)):
            l, r = t.left, t.right
            if isinstance(l, LamFs) and isinstance(r, LamFs):
                return beta_normalize(t)
            if isinstance(l, LamTyped) and isinstance(r, LamTyped) \
                    and l.binder_type == r.binder_type:
                return beta_normalize(t)
        return None

    # tier 2: conjunct ordering and pushing applications into connectives

    def tier_reorder(self, t: Term, bound: frozenset):
        if isinstance(t, (And, Or)):
            ctor = type(t)
            if isinstance(t.left, ctor):
                inner = t.left
                return ctor(inner.left, ctor(inner.right, t.right))
            lc = _conj_class(t.left)
            if isinstance(t.right, ctor):
                if _conj_class(t.right.left) < lc:
                    return ctor(t.right.left, ctor(t.left, t.right.right))
            elif _conj_class(t.right) < lc:
                return ctor(t.right, t.left)
            return None
        if isinstance(t, (ApplyPath, ApplyAtom, Apply)):
            f = t.fun
            if isinstance(f, (And, Or)):
                return type(f)(self._reapply(t, f.left),
                               self._reapply(t, f.right))
            if isinstance(f, Not):
                return Not(self._reapply(t, f.expr))
        return None

    @staticmethod
    def _reapply(app: Term, fun: Term) -> Term:
        if isinstance(app, ApplyPath):
            return ApplyPath(fun, app.base, app.path)
        if isinstance(app, ApplyAtom):
            return ApplyAtom(fun, app.atom)
        return Apply(fun, app.arg)

    # tier 3: truth identities, type-directed

    def tier_truth(self, t: Term, bound: frozenset):
        if isinstance(t, And):
            if isinstance(t.left, TruthConst):
                return t.left if not t.left.value else t.right
            if isinstance(t.right, TruthConst):
                return t.right if not t.right.value else t.left
        if isinstance(t, Or):
            if isinstance(t.left, TruthConst):
                return t.left if t.left.value else t.right
            if isinstance(t.right, TruthConst):
                return t.right if t.right.value else t.left
        if isinstance(t, Not) and isinstance(t.expr, TruthConst):
            return TruthConst(not t.expr.value, t.expr.type)
        if isinstance(t, (ApplyPath, ApplyAtom)) \
                and isinstance(t.fun, TruthConst) \
                and isinstance(t.fun.type, FsArrow):
            return TruthConst(t.fun.value, t.fun.type.result)
        if isinstance(t, Apply) and isinstance(t.fun, TruthConst) \
                and isinstance(t.fun.type, Arrow):
            return TruthConst(t.fun.value, t.fun.type.result)
        return None

    # tier 4: model-relative simplification

    def tier_model(self, m: SolvedForm, t: Term, bound: frozenset):
        if _is_atomic(t):
            return self._atom_rule(m, t, bound)
        if isinstance(t, ApplyPath):
            return self._apply_base_rule(m, t, bound)
        if isinstance(t, And):
            return self._context_rule(m, t, bound)
        return None

    def _shadowed(self, ref, bound: frozenset) -> bool:
        return isinstance(ref, FsVar) and ref.name in bound

    def _atom_rule(self, m: SolvedForm, t: Term, bound: frozenset):
        if isinstance(t, Eq):
            lhs, lpath, rhs, rpath, neg = t.lhs, (), t.rhs, (), t.negated
        else:
            lhs, lpath, rhs, rpath, neg = \
                t.lhs, t.path, t.rhs, t.rpath, t.negated
        if self._shadowed(lhs, bound):
            n1, rem1 = lhs, tuple(lpath)
        else:
            n1, rem1 = m.lookup(lhs, lpath)
        if self._shadowed(rhs, bound):
            n2, rem2 = rhs, tuple(rpath)
        else:
            n2, rem2 = m.lookup(rhs, rpath)
        if (isinstance(n1, Atom) and rem1) or (isinstance(n2, Atom) and rem2):
            # the positive constraint demands a feature on an atom
            return _truth(neg)
        if not rem1 and not rem2:
            if n1 == n2:
                return _truth(not neg)
            if isinstance(n1, Atom) and isinstance(n2, Atom):
                return _truth(neg)
        new = path_eq(n1, rem1, n2, rem2, neg)
        if new != t:
            return new
        if not neg and not any(self._shadowed(r, bound)
                               for r in _atom_refs(t)):
            trial = assert_atomic(m, t)
            if trial is BOTTOM:
                return _truth(False)
            if trial == m:
                return _truth(True)
        return None

    def _apply_base_rule(self, m: SolvedForm, t: ApplyPath,
                         bound: frozenset):
        if self._shadowed(t.base, bound):
            return None
        n, rem = m.lookup(t.base, t.path)
        if isinstance(n, Atom) and rem:
            # the argument node is missing; which truth value that gives
            # is the function's business, so leave the application alone
            return None
        if (n, rem) != (t.base, tuple(t.path)):
            return apply_path(t.fun, n, rem)
        return None

    def _context_rule(self, m: SolvedForm, t: And, bound: frozenset):
        sides = ((t.left, t.right, lambda e: And(t.left, e)),
                 (t.right, t.left, lambda e: And(e, t.right)))
        for c, e, rebuild in sides:
            if not _assertable(c, bound):
                continue
            m2 = assert_atomic(m, c)
            if m2 is BOTTOM:
                return _truth(False)
            e2 = self.fixpoint(m2, e)
            if e2 != e:
                # the trial extension may have invented nodes; those must
                # not escape into the residue once m2 is rolled back
                e2 = _resolve_trial_nodes(m, m2, e2)
                # renamings that merely swap node representatives under
                # different trials would cycle; demand real shrinkage
                if e2 is not None and e2 != e \
                        and _residue_measure(e2) < _residue_measure(e):
                    return rebuild(e2)
        return None

    # tier 5: gated distribution (complete mode only)

    def tier_distribute(self, m: SolvedForm, t: Term, bound: frozenset):
        if not isinstance(t, And):
            return None
        if isinstance(t.left, Or):
            e1, e2, e3 = t.left.left, t.left.right, t.right
            if m_dependent(m, e1, e3) and m_dependent(m, e2, e3):
                return Or(And(e1, e3), And(e2, e3))
        if isinstance(t.right, Or):
            e1, e2, e3 = t.right.left, t.right.right, t.left
            if m_dependent(m, e1, e3) and m_dependent(m, e2, e3):
                return Or(And(e3, e1), And(e3, e2))
        return None


# --------------------------------------------------------------------------
# negation normal form


def nnf(t: Term, neg: bool = False) -> Term:
    """Push negation down to equations and opaque subterms."""
    if isinstance(t, TruthConst):
        return TruthConst(t.value != neg, t.type)
    if isinstance(t, TypedVar):
        return Not(t) if neg else t
    if isinstance(t, And):
        l, r = nnf(t.left, neg), nnf(t.right, neg)
        return Or(l, r) if neg else And(l, r)
    if isinstance(t, Or):
        l, r = nnf(t.left, neg), nnf(t.right, neg)
        return And(l, r) if neg else Or(l, r)
    if isinstance(t, Not):
        return nnf(t.expr, not neg)
    if isinstance(t, Eq):
        return Eq(t.lhs, t.rhs, t.negated != neg)
    if isinstance(t, PathEq):
        return PathEq(t.lhs, t.path, t.rhs, t.rpath, t.negated != neg)
    if isinstance(t, LamFs):
        return LamFs(t.binder, nnf(t.body, neg))
    if isinstance(t, LamTyped):
        return LamTyped(t.binder, t.binder_type, nnf(t.body, neg))
    if isinstance(t, (ApplyPath, ApplyAtom, Apply)):
        inner = _nnf_app(t)
        return Not(inner) if neg else inner
    raise SolverError(f"not a term: {t!r}")


def _nnf_app(t: Term) -> Term:
    if isinstance(t, ApplyPath):
        return ApplyPath(nnf(t.fun), t.base, t.path)
    if isinstance(t, ApplyAtom):
        return ApplyAtom(nnf(t.fun), t.atom)
    return Apply(nnf(t.fun), nnf(t.arg))


# --------------------------------------------------------------------------
# the solver


@dataclass(frozen=True)
class SolverState:
    model: object
    residue: Term
    mode: str = "complete"

    @property
    def is_false(self) -> bool:
        return isinstance(self.residue, TruthConst) \
            and not self.residue.value

    @property
    def negatives(self) -> tuple:
        return tuple(c for c in _flatten_and(self.residue)
                     if _is_atomic(c) and c.negated)


_FAILED = SolverState(BOTTOM, FALSE)


def _default_fuel(size: int) -> int:
    env = os.environ.get("CCLG_FUEL", "")
    if env.strip():
        return int(env)
    return 1000 * max(size, 4)


def solve(e: Term, mode: str = "complete", fuel: int | None = None) \
        -> SolverState:
    """Factor a description into a partial model and a normal residue."""
    if mode not in ("complete", "polynomial"):
        raise SolverError(f"unknown mode {mode!r}")
    t = beta_normalize(e)
    t = nnf(t)
    _binders, body = open_description(t)
    budget = Fuel(fuel if fuel is not None
                  else _default_fuel(term_size(body)))
    rw = _Rewriter(mode, budget)
    m: SolvedForm = EMPTY_SOLVED
    conjuncts = _flatten_and(body)
    while True:
        kept: list = []
        progressed = False
        for c in conjuncts:
            if isinstance(c, TruthConst):
                if not c.value:
                    return SolverState(BOTTOM, FALSE, mode)
                progressed = True
                continue
            if _is_positive_atomic(c):
                budget.spend()
                m = assert_atomic(m, c)
                if m is BOTTOM:
                    return SolverState(BOTTOM, FALSE, mode)
                progressed = True
                continue
            kept.append(c)
        conjuncts = kept
        if progressed:
            continue
        residue = _rebuild_and(conjuncts)
        stepped = rw.step(m, residue)
        if stepped is None:
            return SolverState(m, residue, mode)
        conjuncts = _flatten_and(stepped)


def satisfiable(e: Term, mode: str = "complete") -> bool:
    """Whether some assignment and trees make the description true.

    The λ-prefix is stripped (read existentially); in complete mode the
    verdict is exact on the first-order fragment.
    """
    return not solve(e, mode).is_false


# --------------------------------------------------------------------------
# oracles and model enumeration


def _require_first_order(t: Term) -> None:
    if isinstance(t, (LamFs, LamTyped, Apply, ApplyAtom, ApplyPath,
                      TypedVar)):
        raise SolverError(
            "first-order operation on a higher-order term")
    if isinstance(t, (And, Or)):
        _require_first_order(t.left)
        _require_first_order(t.right)
    elif isinstance(t, Not):
        _require_first_order(t.expr)


def _dnf_width(t: Term) -> int:
    if isinstance(t, And):
        return _dnf_width(t.left) * _dnf_width(t.right)
    if isinstance(t, Or):
        return _dnf_width(t.left) + _dnf_width(t.right)
    return 1


def _dnf(t: Term):
    """Yield disjuncts as lists of literals (NNF input)."""
    if isinstance(t, Or):
        yield from _dnf(t.left)
        yield from _dnf(t.right)
    elif isinstance(t, And):
        for l in _dnf(t.left):
            for r in _dnf(t.right):
                yield l + r
    else:
        yield [t]


DNF_WIDTH_LIMIT = 4096


def oracle_sat(e: Term, width_limit: int = DNF_WIDTH_LIMIT) -> bool:
    """Exhaustive DNF satisfiability; exponential, for testing only."""
    t = nnf(beta_normalize(e))
    _require_first_order(t)
    if _dnf_width(t) > width_limit:
        raise OracleLimit(
            f"DNF expansion would exceed {width_limit} disjuncts")
    for literals in _dnf(t):
        m: object = EMPTY_SOLVED
        alive = True
        negatives = []
        for lit in literals:
            if isinstance(lit, TruthConst):
                if not lit.value:
                    alive = False
                    break
                continue
            if not _is_atomic(lit):
                raise SolverError(f"not a literal: {lit!r}")
            if lit.negated:
                negatives.append(lit)
                continue
            m = assert_atomic(m, lit)
            if m is BOTTOM:
                alive = False
                break
        if alive:
            # solved forms are satisfiable; a negative only fails when
            # the model forces its two sides together
            alive = all(check_negative(m, n) != "violated"
                        for n in negatives)
        if alive:
            return True
    return False


def entails(m1: SolvedForm, m2: SolvedForm) -> bool:
    """Whether every model of m1 is a model of m2 (positive forms)."""
    for fact in external_facts(m2):
        if isinstance(fact, TruthConst):
            if not fact.value:
                return False
            continue
        if isinstance(fact, Eq):
            if m1.canon(fact.lhs) != m1.canon(fact.rhs):
                return False
            continue
        n1, rem1 = m1.lookup(fact.lhs, fact.path)
        n2, rem2 = m1.lookup(fact.rhs, fact.rpath)
        if rem1 or rem2 or n1 != n2:
            return False
    return True


def minimal_models(e: Term, width_limit: int = DNF_WIDTH_LIMIT) -> list:
    """All minimal solved forms covering a positive first-order term."""
    t = nnf(beta_normalize(e))
    _require_first_order(t)
    if _has_negative(t):
        raise SolverError(
            "minimal-model enumeration covers positive constraints only")
    if _dnf_width(t) > width_limit:
        raise OracleLimit(
            f"DNF expansion would exceed {width_limit} disjuncts")
    candidates: list = []
    for literals in _dnf(t):
        m: object = EMPTY_SOLVED
        for lit in literals:
            if isinstance(lit, TruthConst):
                if not lit.value:
                    m = BOTTOM
                    break
                continue
            m = assert_atomic(m, lit)
            if m is BOTTOM:
                break
        if m is not BOTTOM:
            candidates.append(m)
    kept: list = []
    for m in candidates:
        if any(entails(m, k) for k in kept):
            continue
        kept = [k for k in kept if not entails(k, m)]
        kept.append(m)
    return kept


def _has_negative(t: Term) -> bool:
    if isinstance(t, (Eq, PathEq)):
        return t.negated
    if isinstance(t, (And, Or)):
        return _has_negative(t.left) or _has_negative(t.right)
    if isinstance(t, Not):
        return True
    return False
