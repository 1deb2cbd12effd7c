"""Typed feature-description terms.

A description is a boolean combination of equations between nodes of
feature structures, closed under abstraction over feature-structure
variables and over typed description variables.  Types are ``bool``,
``fs -> t`` and ``t -> t'``; ``fs`` itself is never a description type,
it only occurs as the domain of an abstraction.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass
from typing import Iterator, Union


class TermError(Exception):
    """Malformed term or ill-kinded operation on a term."""


class KindMismatchError(TermError):
    """A substitution or application mixed fs-level and typed material."""


# --------------------------------------------------------------------------
# types


class Type:
    __slots__ = ()


@dataclass(frozen=True)
class Bool(Type):
    def __repr__(self) -> str:
        return "bool"


@dataclass(frozen=True)
class FsArrow(Type):
    """Type of abstractions over feature-structure variables."""

    result: Type

    def __repr__(self) -> str:
        return type_text(self)


@dataclass(frozen=True)
class Arrow(Type):
    arg: Type
    result: Type

    def __repr__(self) -> str:
        return type_text(self)


@dataclass(frozen=True)
class TypeMeta(Type):
    """Inference placeholder; never survives in a checked lexical entry."""

    ident: int

    def __repr__(self) -> str:
        return f"?{self.ident}"


BOOL = Bool()


def type_text(t: Type) -> str:
    """Render a type in the source syntax, with minimal parentheses."""
    if isinstance(t, Bool):
        return "bool"
    if isinstance(t, TypeMeta):
        return f"?{t.ident}"
    if isinstance(t, FsArrow):
        return "fs -> " + type_text(t.result)
    if isinstance(t, Arrow):
        left = type_text(t.arg)
        if isinstance(t.arg, (Arrow, FsArrow)):
            left = f"({left})"
        return left + " -> " + type_text(t.result)
    raise TermError(f"not a type: {t!r}")


def type_is_resolved(t: Type) -> bool:
    if isinstance(t, TypeMeta):
        return False
    if isinstance(t, FsArrow):
        return type_is_resolved(t.result)
    if isinstance(t, Arrow):
        return type_is_resolved(t.arg) and type_is_resolved(t.result)
    return True


# --------------------------------------------------------------------------
# references to feature-structure nodes


@dataclass(frozen=True)
class Atom:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FsVar:
    name: str

    def __repr__(self) -> str:
        return self.name


FsRef = Union[Atom, FsVar]

Path = tuple  # tuple[str, ...]


@dataclass(frozen=True)
class PathRef:
    """A node reached from a base reference by following features."""

    base: FsRef
    path: Path


def ref_text(base: FsRef, path: Path = ()) -> str:
    return ".".join((base.name,) + tuple(path))


# --------------------------------------------------------------------------
# terms


class Term:
    __slots__ = ()

    def __repr__(self) -> str:
        return term_text(self)


@dataclass(frozen=True, repr=False)
class TruthConst(Term):
    value: bool
    type: Type


@dataclass(frozen=True, repr=False)
class TypedVar(Term):
    name: str
    type: Type


@dataclass(frozen=True, repr=False)
class And(Term):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class Or(Term):
    left: Term
    right: Term


@dataclass(frozen=True, repr=False)
class Not(Term):
    expr: Term


@dataclass(frozen=True, repr=False)
class ApplyPath(Term):
    """Application of a description to a feature-structure node.

    The path may be empty (application to a bare variable).  An atom in
    base position only ever carries a nonempty path; the empty case is
    represented by ApplyAtom.
    """

    fun: Term
    base: FsRef
    path: Path

    def __post_init__(self) -> None:
        if isinstance(self.base, Atom) and not self.path:
            raise TermError("application to a bare atom must use ApplyAtom")


@dataclass(frozen=True, repr=False)
class ApplyAtom(Term):
    fun: Term
    atom: str


@dataclass(frozen=True, repr=False)
class Apply(Term):
    fun: Term
    arg: Term


@dataclass(frozen=True, repr=False)
class PathEq(Term):
    """Equation between two nodes, at least one reached via features.

    The left path is always nonempty; an equation with only a right-hand
    path is flipped at construction, and one with no paths at all is an
    Eq.  ``negated`` marks the polarity produced by ``\\=`` or by pushing
    a negation onto the atom.
    """

    lhs: FsRef
    path: Path
    rhs: FsRef
    rpath: Path = ()
    negated: bool = False

    def __post_init__(self) -> None:
        if not self.path:
            raise TermError("PathEq requires a nonempty left path; use path_eq")


@dataclass(frozen=True, repr=False)
class Eq(Term):
    lhs: FsRef
    rhs: FsRef
    negated: bool = False


@dataclass(frozen=True, repr=False)
class LamFs(Term):
    binder: str
    body: Term


@dataclass(frozen=True, repr=False)
class LamTyped(Term):
    binder: str
    binder_type: Type
    body: Term


def path_eq(lhs: FsRef, path: Path, rhs: FsRef, rpath: Path = (),
            negated: bool = False) -> Term:
    """Build an equation, normalising empty paths away."""
    path, rpath = tuple(path), tuple(rpath)
    if not path and not rpath:
        return Eq(lhs, rhs, negated)
    if not path:
        lhs, path, rhs, rpath = rhs, rpath, lhs, ()
    return PathEq(lhs, path, rhs, rpath, negated)


def apply_path(fun: Term, base: FsRef, path: Path = ()) -> Term:
    """Apply a description to a node reference; bare atoms use ApplyAtom."""
    path = tuple(path)
    if isinstance(base, Atom) and not path:
        return ApplyAtom(fun, base.name)
    return ApplyPath(fun, base, path)


def true(t: Type = BOOL) -> TruthConst:
    return TruthConst(True, t)


def false(t: Type = BOOL) -> TruthConst:
    return TruthConst(False, t)


TRUE = true()
FALSE = false()


# --------------------------------------------------------------------------
# fresh names

_fresh_counter = itertools.count(1)
_fresh_lock = threading.Lock()


def fresh_name(avoid: frozenset = frozenset(), prefix: str = "x_") -> str:
    """Next unused name from the shared counter (x_1, x_2, ...)."""
    while True:
        with _fresh_lock:
            n = next(_fresh_counter)
        name = f"{prefix}{n}"
        if name not in avoid:
            return name


def reset_fresh_names() -> None:
    """Restart the counter; intended for reproducible tests."""
    global _fresh_counter
    with _fresh_lock:
        _fresh_counter = itertools.count(1)


# --------------------------------------------------------------------------
# traversal helpers


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, (And, Or)):
        yield from subterms(t.left)
        yield from subterms(t.right)
    elif isinstance(t, Not):
        yield from subterms(t.expr)
    elif isinstance(t, (ApplyPath, ApplyAtom)):
        yield from subterms(t.fun)
    elif isinstance(t, Apply):
        yield from subterms(t.fun)
        yield from subterms(t.arg)
    elif isinstance(t, (LamFs, LamTyped)):
        yield from subterms(t.body)


def term_size(t: Term) -> int:
    n = sum(1 for _ in subterms(t))
    return n


def free_vars(t: Term) -> tuple[frozenset, frozenset]:
    """Free (fs-variable, typed-variable) names of a term."""
    fs: set = set()
    typed: set = set()

    def ref(r: FsRef, bound: frozenset) -> None:
        if isinstance(r, FsVar) and r.name not in bound:
            fs.add(r.name)

    def walk(t: Term, bound_fs: frozenset, bound_ty: frozenset) -> None:
        if isinstance(t, TypedVar):
            if t.name not in bound_ty:
                typed.add(t.name)
        elif isinstance(t, (And, Or)):
            walk(t.left, bound_fs, bound_ty)
            walk(t.right, bound_fs, bound_ty)
        elif isinstance(t, Not):
            walk(t.expr, bound_fs, bound_ty)
        elif isinstance(t, ApplyPath):
            walk(t.fun, bound_fs, bound_ty)
            ref(t.base, bound_fs)
        elif isinstance(t, ApplyAtom):
            walk(t.fun, bound_fs, bound_ty)
        elif isinstance(t, Apply):
            walk(t.fun, bound_fs, bound_ty)
            walk(t.arg, bound_fs, bound_ty)
        elif isinstance(t, PathEq):
            ref(t.lhs, bound_fs)
            ref(t.rhs, bound_fs)
        elif isinstance(t, Eq):
            ref(t.lhs, bound_fs)
            ref(t.rhs, bound_fs)
        elif isinstance(t, LamFs):
            walk(t.body, bound_fs | {t.binder}, bound_ty)
        elif isinstance(t, LamTyped):
            walk(t.body, bound_fs, bound_ty | {t.binder})

    walk(t, frozenset(), frozenset())
    return frozenset(fs), frozenset(typed)


def atom_names(t: Term) -> frozenset:
    names: set = set()
    for s in subterms(t):
        if isinstance(s, ApplyAtom):
            names.add(s.atom)
        elif isinstance(s, (PathEq, Eq)):
            for r in (s.lhs, s.rhs):
                if isinstance(r, Atom):
                    names.add(r.name)
        elif isinstance(s, ApplyPath) and isinstance(s.base, Atom):
            names.add(s.base.name)
    return frozenset(names)


# --------------------------------------------------------------------------
# substitution

Replacement = Union[Term, Atom, FsVar, PathRef]


def _replacement_free_names(rep: Replacement) -> frozenset:
    if isinstance(rep, FsVar):
        return frozenset({rep.name})
    if isinstance(rep, PathRef):
        if isinstance(rep.base, FsVar):
            return frozenset({rep.base.name})
        return frozenset()
    if isinstance(rep, Atom):
        return frozenset()
    fs, ty = free_vars(rep)
    return fs | ty


def substitute(t: Term, var: str, rep: Replacement) -> Term:
    """Capture-avoiding substitution of ``rep`` for the variable ``var``.

    An fs-variable may be replaced by an atom, another fs variable or a
    node reference ``base.path``; in the last case an occurrence ``var.q``
    turns into ``base.(path . q)``.  A typed variable may be replaced by
    a term.  Mixing the two kinds raises KindMismatchError.
    """
    fs_kind = isinstance(rep, (Atom, FsVar, PathRef))
    rep_free = _replacement_free_names(rep)

    def sub_ref(r: FsRef, q: Path) -> tuple[FsRef, Path]:
        if isinstance(r, FsVar) and r.name == var:
            if not fs_kind:
                raise KindMismatchError(
                    f"cannot substitute a term for fs occurrences of {var}")
            if isinstance(rep, PathRef):
                return rep.base, tuple(rep.path) + tuple(q)
            return rep, tuple(q)
        return r, tuple(q)

    def walk(t: Term, bound: frozenset) -> Term:
        if isinstance(t, TruthConst):
            return t
        if isinstance(t, TypedVar):
            if t.name == var and t.name not in bound:
                if fs_kind:
                    raise KindMismatchError(
                        f"cannot substitute a node reference for typed "
                        f"variable {var}")
                return rep
            return t
        if isinstance(t, And):
            return And(walk(t.left, bound), walk(t.right, bound))
        if isinstance(t, Or):
            return Or(walk(t.left, bound), walk(t.right, bound))
        if isinstance(t, Not):
            return Not(walk(t.expr, bound))
        if isinstance(t, ApplyPath):
            fun = walk(t.fun, bound)
            if var in bound:
                return ApplyPath(fun, t.base, t.path)
            base, path = sub_ref(t.base, t.path)
            return apply_path(fun, base, path)
        if isinstance(t, ApplyAtom):
            return ApplyAtom(walk(t.fun, bound), t.atom)
        if isinstance(t, Apply):
            return Apply(walk(t.fun, bound), walk(t.arg, bound))
        if isinstance(t, PathEq):
            if var in bound:
                return t
            lhs, path = sub_ref(t.lhs, t.path)
            rhs, rpath = sub_ref(t.rhs, t.rpath)
            return path_eq(lhs, path, rhs, rpath, t.negated)
        if isinstance(t, Eq):
            if var in bound:
                return t
            lhs, path = sub_ref(t.lhs, ())
            rhs, rpath = sub_ref(t.rhs, ())
            return path_eq(lhs, path, rhs, rpath, t.negated)
        if isinstance(t, LamFs):
            if t.binder == var:
                return t
            if t.binder in rep_free:
                new = fresh_name(rep_free | free_all(t.body) | {var})
                body = substitute(t.body, t.binder, FsVar(new))
                return LamFs(new, walk(body, bound))
            return LamFs(t.binder, walk(t.body, bound))
        if isinstance(t, LamTyped):
            if t.binder == var:
                return t
            if t.binder in rep_free:
                new = fresh_name(rep_free | free_all(t.body) | {var})
                body = substitute(t.body, t.binder,
                                  TypedVar(new, t.binder_type))
                return LamTyped(new, t.binder_type, walk(body, bound))
            return LamTyped(t.binder, t.binder_type, walk(t.body, bound))
        raise TermError(f"not a term: {t!r}")

    return walk(t, frozenset())


def free_all(t: Term) -> frozenset:
    fs, ty = free_vars(t)
    return fs | ty


# --------------------------------------------------------------------------
# alpha equivalence


def alpha_eq(a: Term, b: Term) -> bool:
    """Structural equality up to consistent renaming of bound variables."""

    def ref_eq(r1: FsRef, r2: FsRef, env: dict, renv: dict) -> bool:
        if isinstance(r1, Atom) or isinstance(r2, Atom):
            return r1 == r2
        n1 = env.get(r1.name, r1.name)
        n2 = renv.get(r2.name, r2.name)
        if r1.name in env or r2.name in renv:
            return env.get(r1.name) == r2.name and renv.get(r2.name) == r1.name
        return n1 == n2

    def walk(a: Term, b: Term, env: dict, renv: dict) -> bool:
        if type(a) is not type(b):
            return False
        if isinstance(a, TruthConst):
            return a == b
        if isinstance(a, TypedVar):
            if a.name in env or b.name in renv:
                return env.get(a.name) == b.name and renv.get(b.name) == a.name
            return a.name == b.name and a.type == b.type
        if isinstance(a, (And, Or)):
            return (walk(a.left, b.left, env, renv)
                    and walk(a.right, b.right, env, renv))
        if isinstance(a, Not):
            return walk(a.expr, b.expr, env, renv)
        if isinstance(a, ApplyPath):
            return (a.path == b.path
                    and ref_eq(a.base, b.base, env, renv)
                    and walk(a.fun, b.fun, env, renv))
        if isinstance(a, ApplyAtom):
            return a.atom == b.atom and walk(a.fun, b.fun, env, renv)
        if isinstance(a, Apply):
            return (walk(a.fun, b.fun, env, renv)
                    and walk(a.arg, b.arg, env, renv))
        if isinstance(a, PathEq):
            return (a.path == b.path and a.rpath == b.rpath
                    and a.negated == b.negated
                    and ref_eq(a.lhs, b.lhs, env, renv)
                    and ref_eq(a.rhs, b.rhs, env, renv))
        if isinstance(a, Eq):
            return (a.negated == b.negated
                    and ref_eq(a.lhs, b.lhs, env, renv)
                    and ref_eq(a.rhs, b.rhs, env, renv))
        if isinstance(a, LamFs):
            env2 = dict(env)
            renv2 = dict(renv)
            env2[a.binder] = b.binder
            renv2[b.binder] = a.binder
            return walk(a.body, b.body, env2, renv2)
        if isinstance(a, LamTyped):
            if a.binder_type != b.binder_type:
                return False
            env2 = dict(env)
            renv2 = dict(renv)
            env2[a.binder] = b.binder
            renv2[b.binder] = a.binder
            return walk(a.body, b.body, env2, renv2)
        return False

    return walk(a, b, {}, {})


# --------------------------------------------------------------------------
# beta normalisation


class FuelExhausted(TermError):
    """A rewrite loop ran past its step budget; indicates an engine bug."""


def beta_normalize(t: Term, max_steps: int | None = None) -> Term:
    """Reduce all redexes and push connectives through abstractions.

    The three application forms reduce by substitution.  A negation of an
    abstraction moves inside the binder, and a conjunction or disjunction
    of two abstractions of the same kind fuses into one abstraction over
    the combined body.  The result has no redex and is unique up to the
    names of bound variables.
    """
    if max_steps is None:
        max_steps = 10_000 + 100 * term_size(t)
    budget = [max_steps]

    def spend() -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise FuelExhausted("beta reduction exceeded its step budget")

    def merge(kind, l: Term, r: Term) -> Term | None:
        if isinstance(l, LamFs) and isinstance(r, LamFs):
            spend()
            if l.binder == r.binder:
                body = kind(l.body, r.body)
            else:
                rb = substitute(r.body, r.binder, FsVar(l.binder)) \
                    if l.binder not in free_all(r.body) else None
                if rb is None:
                    new = fresh_name(free_all(l.body) | free_all(r.body))
                    lb = substitute(l.body, l.binder, FsVar(new))
                    rb = substitute(r.body, r.binder, FsVar(new))
                    return LamFs(new, norm(kind(lb, rb)))
                body = kind(l.body, rb)
            return LamFs(l.binder, norm(body))
        if (isinstance(l, LamTyped) and isinstance(r, LamTyped)
                and l.binder_type == r.binder_type):
            spend()
            if l.binder == r.binder:
                body = kind(l.body, r.body)
            else:
                if l.binder not in free_all(r.body):
                    rb = substitute(r.body, r.binder,
                                    TypedVar(l.binder, r.binder_type))
                    body = kind(l.body, rb)
                else:
                    new = fresh_name(free_all(l.body) | free_all(r.body))
                    lb = substitute(l.body, l.binder,
                                    TypedVar(new, l.binder_type))
                    rb = substitute(r.body, r.binder,
                                    TypedVar(new, r.binder_type))
                    return LamTyped(new, l.binder_type, norm(kind(lb, rb)))
            return LamTyped(l.binder, l.binder_type, norm(body))
        return None

    def norm(t: Term) -> Term:
        if isinstance(t, (TruthConst, TypedVar, PathEq, Eq)):
            return t
        if isinstance(t, And):
            l, r = norm(t.left), norm(t.right)
            fused = merge(And, l, r)
            return fused if fused is not None else And(l, r)
        if isinstance(t, Or):
            l, r = norm(t.left), norm(t.right)
            fused = merge(Or, l, r)
            return fused if fused is not None else Or(l, r)
        if isinstance(t, Not):
            e = norm(t.expr)
            if isinstance(e, LamFs):
                spend()
                return LamFs(e.binder, norm(Not(e.body)))
            if isinstance(e, LamTyped):
                spend()
                return LamTyped(e.binder, e.binder_type, norm(Not(e.body)))
            return Not(e)
        if isinstance(t, ApplyPath):
            fun = norm(t.fun)
            if isinstance(fun, LamFs):
                spend()
                return norm(substitute(fun.body, fun.binder,
                                       PathRef(t.base, t.path)))
            if isinstance(fun, LamTyped):
                raise KindMismatchError(
                    "typed abstraction applied to a node reference")
            return ApplyPath(fun, t.base, t.path)
        if isinstance(t, ApplyAtom):
            fun = norm(t.fun)
            if isinstance(fun, LamFs):
                spend()
                return norm(substitute(fun.body, fun.binder, Atom(t.atom)))
            if isinstance(fun, LamTyped):
                raise KindMismatchError("typed abstraction applied to an atom")
            return ApplyAtom(fun, t.atom)
        if isinstance(t, Apply):
            fun = norm(t.fun)
            arg = norm(t.arg)
            if isinstance(fun, LamTyped):
                spend()
                return norm(substitute(fun.body, fun.binder, arg))
            if isinstance(fun, LamFs):
                raise KindMismatchError(
                    "fs abstraction applied to a description")
            return Apply(fun, arg)
        if isinstance(t, LamFs):
            return LamFs(t.binder, norm(t.body))
        if isinstance(t, LamTyped):
            return LamTyped(t.binder, t.binder_type, norm(t.body))
        raise TermError(f"not a term: {t!r}")

    return norm(t)


# --------------------------------------------------------------------------
# basic normal form


def _is_lambda(t: Term) -> bool:
    return isinstance(t, (LamFs, LamTyped))


def _spine_head_ok(fun: Term) -> bool:
    # application heads must bottom out in a typed variable
    while isinstance(fun, (ApplyPath, ApplyAtom, Apply)):
        fun = fun.fun
    return isinstance(fun, TypedVar)


def is_basic_normal(t: Term) -> bool:
    """Check the shape guaranteed for solver residues.

    No redex remains, connective chains are right-nested and sorted
    (variables first, then equations, negations, and opposite-connective
    chains, with application spines last), and application spines are
    headed by variables.
    """
    if isinstance(t, (TruthConst, TypedVar, PathEq, Eq)):
        return True
    if isinstance(t, Not):
        return not _is_lambda(t.expr) and is_basic_normal(t.expr)
    if isinstance(t, (And, Or)):
        same, other = (And, Or) if isinstance(t, And) else (Or, And)
        l, r = t.left, t.right
        if isinstance(l, (TruthConst,)) or isinstance(r, (TruthConst,)):
            return False
        if _is_lambda(l) and _is_lambda(r):
            return False
        if _is_lambda(l):
            return False
        if isinstance(l, (ApplyPath, ApplyAtom, Apply)):
            # spines sink rightwards, so one may lead only a spine chain
            rest = r
            while isinstance(rest, same):
                if not isinstance(rest.left, (ApplyPath, ApplyAtom, Apply)):
                    return False
                rest = rest.right
            if not isinstance(rest, (ApplyPath, ApplyAtom, Apply)):
                return False
            return is_basic_normal(l) and is_basic_normal(r)
        if isinstance(l, same):
            return False
        if not isinstance(l, TypedVar):
            # a variable further right would still be floated leftwards
            if isinstance(r, TypedVar):
                return False
            if isinstance(r, same) and isinstance(r.left, TypedVar):
                return False
        return is_basic_normal(l) and is_basic_normal(r)
    if isinstance(t, ApplyPath):
        if isinstance(t.base, Atom) and t.path:
            return False
        return _spine_head_ok(t.fun) and is_basic_normal(t.fun)
    if isinstance(t, ApplyAtom):
        return _spine_head_ok(t.fun) and is_basic_normal(t.fun)
    if isinstance(t, Apply):
        return (_spine_head_ok(t.fun) and is_basic_normal(t.fun)
                and is_basic_normal(t.arg))
    if isinstance(t, (LamFs, LamTyped)):
        return is_basic_normal(t.body)
    return False


def strip_lambda_prefix(t: Term) -> tuple[tuple, Term]:
    """Split a term into its leading binders and the remaining body.

    Each binder is reported as ``(name, 'fs')`` or ``(name, type)``.
    """
    binders = []
    while True:
        if isinstance(t, LamFs):
            binders.append((t.binder, "fs"))
            t = t.body
        elif isinstance(t, LamTyped):
            binders.append((t.binder, t.binder_type))
            t = t.body
        else:
            return tuple(binders), t


def open_description(t: Term, prefix: str = "x_") -> tuple[tuple, Term]:
    """Strip the lambda prefix, renaming binders to x_1, x_2, ...

    Returns the renamed binders and the opened body, in which the former
    binders occur free under their new names.  Numbering restarts at 1
    for every call so that the outermost node of a description is always
    x_1 regardless of surrounding state.
    """
    binders, body = strip_lambda_prefix(t)
    taken = set(free_all(t)) | set(atom_names(t))
    taken |= {name for name, _ in binders}
    out = []
    n = 0
    for name, kind in binders:
        n += 1
        new = f"{prefix}{n}"
        while new in taken and new != name:
            n += 1
            new = f"{prefix}{n}"
        taken.add(new)
        if new != name:
            if kind == "fs":
                body = substitute(body, name, FsVar(new))
            else:
                body = substitute(body, name, TypedVar(new, kind))
        out.append((new, kind))
    return tuple(out), body


# --------------------------------------------------------------------------
# textual form

_PREC_OR = 1
_PREC_AND = 2
_PREC_NOT = 3
_PREC_APP = 4
_PREC_ATOM = 5


def term_text(t: Term) -> str:
    """Canonical source-syntax rendering; reparseable by the grammar DSL."""

    def render(t: Term, prec: int) -> str:
        if isinstance(t, TruthConst):
            return "true" if t.value else "false"
        if isinstance(t, TypedVar):
            return t.name
        if isinstance(t, (LamFs, LamTyped)):
            s = "\\" + t.binder + ". " + render(t.body, 0)
            return f"({s})" if prec > 0 else s
        if isinstance(t, Or):
            s = render(t.left, _PREC_OR + 1) + " | " + render(t.right, _PREC_OR)
            return f"({s})" if prec > _PREC_OR else s
        if isinstance(t, And):
            s = render(t.left, _PREC_AND + 1) + " & " + render(t.right, _PREC_AND)
            return f"({s})" if prec > _PREC_AND else s
        if isinstance(t, Not):
            s = "~" + render(t.expr, _PREC_NOT)
            return f"({s})" if prec > _PREC_NOT else s
        if isinstance(t, ApplyPath):
            s = render(t.fun, _PREC_APP) + " " + ref_text(t.base, t.path)
            return f"({s})" if prec > _PREC_APP else s
        if isinstance(t, ApplyAtom):
            s = render(t.fun, _PREC_APP) + " " + t.atom
            return f"({s})" if prec > _PREC_APP else s
        if isinstance(t, Apply):
            s = render(t.fun, _PREC_APP) + " " + render(t.arg, _PREC_ATOM)
            return f"({s})" if prec > _PREC_APP else s
        if isinstance(t, PathEq):
            op = "\\=" if t.negated else "="
            return ref_text(t.lhs, t.path) + op + ref_text(t.rhs, t.rpath)
        if isinstance(t, Eq):
            op = "\\=" if t.negated else "="
            return ref_text(t.lhs) + op + ref_text(t.rhs)
        raise TermError(f"not a term: {t!r}")

    return render(t, 0)


# --------------------------------------------------------------------------
# JSON form


def type_to_json(t: Type):
    if isinstance(t, Bool):
        return {"kind": "bool"}
    if isinstance(t, FsArrow):
        return {"kind": "fs_arrow", "result": type_to_json(t.result)}
    if isinstance(t, Arrow):
        return {"kind": "arrow", "arg": type_to_json(t.arg),
                "result": type_to_json(t.result)}
    if isinstance(t, TypeMeta):
        return {"kind": "meta", "ident": t.ident}
    raise TermError(f"not a type: {t!r}")


def type_from_json(d) -> Type:
    kind = d["kind"]
    if kind == "bool":
        return BOOL
    if kind == "fs_arrow":
        return FsArrow(type_from_json(d["result"]))
    if kind == "arrow":
        return Arrow(type_from_json(d["arg"]), type_from_json(d["result"]))
    if kind == "meta":
        return TypeMeta(d["ident"])
    raise TermError(f"unknown type tag: {kind}")


def _ref_to_json(r: FsRef):
    if isinstance(r, Atom):
        return {"kind": "atom", "name": r.name}
    return {"kind": "var", "name": r.name}


def _ref_from_json(d) -> FsRef:
    return Atom(d["name"]) if d["kind"] == "atom" else FsVar(d["name"])


def term_to_json(t: Term):
    if isinstance(t, TruthConst):
        return {"kind": "truth", "value": t.value, "type": type_to_json(t.type)}
    if isinstance(t, TypedVar):
        return {"kind": "typed_var", "name": t.name,
                "type": type_to_json(t.type)}
    if isinstance(t, And):
        return {"kind": "and", "left": term_to_json(t.left),
                "right": term_to_json(t.right)}
    if isinstance(t, Or):
        return {"kind": "or", "left": term_to_json(t.left),
                "right": term_to_json(t.right)}
    if isinstance(t, Not):
        return {"kind": "not", "expr": term_to_json(t.expr)}
    if isinstance(t, ApplyPath):
        return {"kind": "apply_path", "fun": term_to_json(t.fun),
                "base": _ref_to_json(t.base), "path": list(t.path)}
    if isinstance(t, ApplyAtom):
        return {"kind": "apply_atom", "fun": term_to_json(t.fun),
                "atom": t.atom}
    if isinstance(t, Apply):
        return {"kind": "apply", "fun": term_to_json(t.fun),
                "arg": term_to_json(t.arg)}
    if isinstance(t, PathEq):
        return {"kind": "path_eq", "lhs": _ref_to_json(t.lhs),
                "path": list(t.path), "rhs": _ref_to_json(t.rhs),
                "rpath": list(t.rpath), "negated": t.negated}
    if isinstance(t, Eq):
        return {"kind": "eq", "lhs": _ref_to_json(t.lhs),
                "rhs": _ref_to_json(t.rhs), "negated": t.negated}
    if isinstance(t, LamFs):
        return {"kind": "lam_fs", "binder": t.binder,
                "body": term_to_json(t.body)}
    if isinstance(t, LamTyped):
        return {"kind": "lam_typed", "binder": t.binder,
                "binder_type": type_to_json(t.binder_type),
                "body": term_to_json(t.body)}
    raise TermError(f"not a term: {t!r}")


def term_from_json(d) -> Term:
    kind = d["kind"]
    if kind == "truth":
        return TruthConst(d["value"], type_from_json(d["type"]))
    if kind == "typed_var":
        return TypedVar(d["name"], type_from_json(d["type"]))
    if kind == "and":
        return And(term_from_json(d["left"]), term_from_json(d["right"]))
    if kind == "or":
        return Or(term_from_json(d["left"]), term_from_json(d["right"]))
    if kind == "not":
        return Not(term_from_json(d["expr"]))
    if kind == "apply_path":
        return apply_path(term_from_json(d["fun"]), _ref_from_json(d["base"]),
                          tuple(d["path"]))
    if kind == "apply_atom":
        return ApplyAtom(term_from_json(d["fun"]), d["atom"])
    if kind == "apply":
        return Apply(term_from_json(d["fun"]), term_from_json(d["arg"]))
    if kind == "path_eq":
        return path_eq(_ref_from_json(d["lhs"]), tuple(d["path"]),
                       _ref_from_json(d["rhs"]), tuple(d["rpath"]),
                       d["negated"])
    if kind == "eq":
        return Eq(_ref_from_json(d["lhs"]), _ref_from_json(d["rhs"]),
                  d["negated"])
    if kind == "lam_fs":
        return LamFs(d["binder"], term_from_json(d["body"]))
    if kind == "lam_typed":
        return LamTyped(d["binder"], type_from_json(d["binder_type"]),
                        term_from_json(d["body"]))
    raise TermError(f"unknown term tag: {kind}")
