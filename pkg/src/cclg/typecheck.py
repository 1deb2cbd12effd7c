"""Type inference for surface expressions and checking of core terms.

Binder kinds are not written in the source syntax; inference decides
them.  Internally the node kind is a pseudo-type ``fs`` that unifies
like any other type but may only survive as the domain of an arrow;
``fs -> t`` externalizes to the node-abstraction type and a binder whose
type resolves to bare ``fs`` becomes a node binder.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import dsl
from .terms import (
    Apply, ApplyAtom, ApplyPath, Arrow, Atom, BOOL, Bool, Eq, FsArrow, FsVar,
    LamFs, LamTyped, Not, And, Or, PathEq, Term, TermError, TruthConst, Type,
    TypeMeta, TypedVar, apply_path, path_eq, type_is_resolved, type_text,
)


class TypeCheckError(Exception):
    def __init__(self, message: str, pos: dsl.Pos | None = None,
                 filename: str = "<string>"):
        if pos is not None:
            super().__init__(f"{filename}:{pos.line}:{pos.col}: {message}")
        else:
            super().__init__(message)
        self.message = message
        self.pos = pos


class CoreTypeError(TermError):
    """A type-annotated core term is internally inconsistent."""


@dataclass(frozen=True)
class _FsType(Type):
    """Inference-internal stand-in for the node kind."""

    def __repr__(self) -> str:
        return "fs"


_FS = _FsType()


def internalize(t: Type) -> Type:
    if isinstance(t, FsArrow):
        return Arrow(_FS, internalize(t.result))
    if isinstance(t, Arrow):
        return Arrow(internalize(t.arg), internalize(t.result))
    return t


def externalize(t: Type, on_error) -> Type:
    if isinstance(t, Arrow):
        res = externalize(t.result, on_error)
        if isinstance(t.arg, _FsType):
            return FsArrow(res)
        return Arrow(externalize(t.arg, on_error), res)
    if isinstance(t, _FsType):
        on_error()
    return t


def show_type(t: Type) -> str:
    try:
        return type_text(externalize(t, lambda: (_ for _ in ()).throw(TermError())))
    except TermError:
        return repr(t)


class Inferencer:
    """Hindley-Milner style inference over a surface expression.

    ``infer`` returns the (internal) type together with a thunk that
    builds the core term once all metas are resolved, so the choice
    between node application and description application can wait for
    the full constraint set.
    """

    def __init__(self, filename: str = "<string>"):
        self.filename = filename
        self.subst: dict[int, Type] = {}
        self._next_meta = 0

    def fresh_meta(self) -> TypeMeta:
        self._next_meta += 1
        return TypeMeta(self._next_meta)

    def prune(self, t: Type) -> Type:
        while isinstance(t, TypeMeta) and t.ident in self.subst:
            t = self.subst[t.ident]
        return t

    def resolve(self, t: Type) -> Type:
        t = self.prune(t)
        if isinstance(t, Arrow):
            return Arrow(self.resolve(t.arg), self.resolve(t.result))
        return t

    def _occurs(self, m: TypeMeta, t: Type) -> bool:
        t = self.prune(t)
        if isinstance(t, TypeMeta):
            return t.ident == m.ident
        if isinstance(t, Arrow):
            return self._occurs(m, t.arg) or self._occurs(m, t.result)
        return False

    def unify(self, a: Type, b: Type, pos: dsl.Pos | None = None) -> None:
        a, b = self.prune(a), self.prune(b)
        if a == b:
            return
        if isinstance(a, TypeMeta):
            if self._occurs(a, b):
                self.fail(f"cannot construct the infinite type "
                          f"{show_type(a)} = {show_type(b)}", pos)
            self.subst[a.ident] = b
            return
        if isinstance(b, TypeMeta):
            self.unify(b, a, pos)
            return
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.arg, b.arg, pos)
            self.unify(a.result, b.result, pos)
            return
        self.fail(f"cannot unify {show_type(self.resolve(a))} with "
                  f"{show_type(self.resolve(b))}", pos)

    def fail(self, message: str, pos: dsl.Pos | None) -> None:
        raise TypeCheckError(message, pos, self.filename)

    # -- inference proper

    def infer(self, e: dsl.SExpr, env: dict):
        if isinstance(e, dsl.STruth):
            t = self.fresh_meta()
            return t, lambda: TruthConst(e.value, self.out_type(t, e.pos))
        if isinstance(e, dsl.SRef):
            return self.infer_ref_as_description(e, env)
        if isinstance(e, (dsl.SAnd, dsl.SOr)):
            tl, thl = self.infer(e.left, env)
            tr, thr = self.infer(e.right, env)
            self.unify(tl, tr, e.pos)
            ctor = And if isinstance(e, dsl.SAnd) else Or
            return tl, lambda: ctor(thl(), thr())
        if isinstance(e, dsl.SNot):
            t, th = self.infer(e.expr, env)
            return t, lambda: Not(th())
        if isinstance(e, dsl.SEq):
            lref = self.node_ref(e.lhs, env)
            rref = self.node_ref(e.rhs, env)
            return BOOL, lambda: path_eq(lref, e.lhs.path, rref, e.rhs.path,
                                         e.negated)
        if isinstance(e, dsl.SLam):
            t = self.fresh_meta()
            tb, thb = self.infer(e.body, {**env, e.binder: t})

            def build():
                bt = self.resolve(t)
                if isinstance(bt, _FsType):
                    return LamFs(e.binder, thb())
                return LamTyped(e.binder, self.out_type(t, e.pos), thb())

            return Arrow(t, tb), build
        if isinstance(e, dsl.SApp):
            return self.infer_app(e, env)
        if isinstance(e, dsl.SMacro):
            self.fail(f"macro {e.name!r} was not expanded before type "
                      f"checking", e.pos)
        self.fail(f"cannot type expression {e!r}", getattr(e, "pos", None))

    def infer_app(self, e: dsl.SApp, env: dict):
        tf, thf = self.infer(e.fun, env)
        arg = e.arg
        res = self.fresh_meta()
        if isinstance(arg, dsl.SRef):
            bound = arg.base in env
            if not bound:
                # unbound identifier in argument position is an atom
                self.unify(tf, Arrow(_FS, res), e.pos)
                return res, lambda: apply_path(thf(), Atom(arg.base), arg.path)
            if arg.path:
                self.unify(env[arg.base], _FS, arg.pos)
                self.unify(tf, Arrow(_FS, res), e.pos)
                return res, lambda: ApplyPath(thf(), FsVar(arg.base), arg.path)
            # a bare bound name: node or description, decided by resolution
            self.unify(tf, Arrow(env[arg.base], res), e.pos)

            def build():
                at = self.resolve(env[arg.base])
                if isinstance(at, _FsType):
                    return ApplyPath(thf(), FsVar(arg.base), ())
                return Apply(thf(), TypedVar(arg.base,
                                             self.out_type(at, arg.pos)))

            return res, build
        ta, tha = self.infer(arg, env)
        self.unify(tf, Arrow(ta, res), e.pos)
        return res, lambda: Apply(thf(), tha())

    def infer_ref_as_description(self, e: dsl.SRef, env: dict):
        if e.base not in env:
            self.fail(f"unbound identifier {e.base!r} used as a description "
                      f"(atoms may only appear in equations or as "
                      f"application arguments)", e.pos)
        if e.path:
            self.fail(f"node reference {e.base}.{'.'.join(e.path)} cannot "
                      f"be used as a description", e.pos)
        t = env[e.base]

        def build():
            rt = self.resolve(t)
            if isinstance(rt, _FsType):
                self.fail(f"{e.base!r} is used both as a node and as a "
                          f"description", e.pos)
            return TypedVar(e.base, self.out_type(t, e.pos))

        return t, build

    def node_ref(self, r: dsl.SRef, env: dict):
        if r.base in env:
            self.unify(env[r.base], _FS, r.pos)
            return FsVar(r.base)
        return Atom(r.base)

    def out_type(self, t: Type, pos: dsl.Pos) -> Type:
        t = self.resolve(t)

        def bad():
            self.fail(f"malformed type: the node kind may only appear as an "
                      f"abstraction domain", pos)

        return externalize(t, bad)


def infer_term(e: dsl.SExpr, expected: Type | None = None,
               filename: str = "<string>") -> tuple[Term, Type]:
    """Infer a closed surface expression into an annotated core term."""
    inf = Inferencer(filename)
    t, thunk = inf.infer(e, {})
    if expected is not None:
        inf.unify(t, internalize(expected), getattr(e, "pos", None))
    term = thunk()
    out = inf.out_type(t, getattr(e, "pos", dsl.Pos(0, 0)))
    return term, out


def term_types_resolved(t: Term) -> bool:
    if isinstance(t, (TruthConst, TypedVar)):
        return type_is_resolved(t.type)
    if isinstance(t, (And, Or)):
        return term_types_resolved(t.left) and term_types_resolved(t.right)
    if isinstance(t, Not):
        return term_types_resolved(t.expr)
    if isinstance(t, (ApplyPath, ApplyAtom)):
        return term_types_resolved(t.fun)
    if isinstance(t, Apply):
        return term_types_resolved(t.fun) and term_types_resolved(t.arg)
    if isinstance(t, (PathEq, Eq)):
        return True
    if isinstance(t, LamFs):
        return term_types_resolved(t.body)
    if isinstance(t, LamTyped):
        return (type_is_resolved(t.binder_type)
                and term_types_resolved(t.body))
    return False


def check_entry(label: str, expected: Type, e: dsl.SExpr,
                filename: str = "<string>") -> Term:
    """Type an entry's semantics against the type its category demands."""
    try:
        term, _ = infer_term(e, expected, filename)
    except TypeCheckError as err:
        raise TypeCheckError(f"in {label}: {err.message}", err.pos,
                             filename) from None
    if not term_types_resolved(term):
        raise TypeCheckError(
            f"in {label}: the semantics is ambiguously typed (an "
            f"unconstrained type variable remains)",
            getattr(e, "pos", None), filename)
    return term


# --------------------------------------------------------------------------
# checking annotated core terms


def type_of(t: Term) -> Type:
    """Synthesize the type of an annotated core term, or raise."""
    if isinstance(t, (TruthConst, TypedVar)):
        return t.type
    if isinstance(t, (And, Or)):
        lt, rt = type_of(t.left), type_of(t.right)
        if lt != rt:
            raise CoreTypeError(
                f"connective over distinct types {type_text(lt)} and "
                f"{type_text(rt)}")
        return lt
    if isinstance(t, Not):
        return type_of(t.expr)
    if isinstance(t, (PathEq, Eq)):
        return BOOL
    if isinstance(t, (ApplyPath, ApplyAtom)):
        ft = type_of(t.fun)
        if not isinstance(ft, FsArrow):
            raise CoreTypeError(
                f"node application of a {type_text(ft)} function")
        return ft.result
    if isinstance(t, Apply):
        ft = type_of(t.fun)
        at = type_of(t.arg)
        if not isinstance(ft, Arrow):
            raise CoreTypeError(f"application of a {type_text(ft)} function")
        if ft.arg != at:
            raise CoreTypeError(
                f"argument type {type_text(at)} does not match domain "
                f"{type_text(ft.arg)}")
        return ft.result
    if isinstance(t, LamFs):
        return FsArrow(type_of(t.body))
    if isinstance(t, LamTyped):
        return Arrow(t.binder_type, type_of(t.body))
    raise CoreTypeError(f"not a term: {t!r}")


def well_typed(t: Term) -> bool:
    try:
        type_of(t)
        return True
    except CoreTypeError:
        return False
