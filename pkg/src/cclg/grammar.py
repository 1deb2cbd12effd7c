"""Categories, the category-to-type map, grammars, macros, unary rules.

A grammar couples a categorial backbone with feature-description
semantics: base categories carry declared types, compound categories get
their types from the slash law, and every lexical entry's semantics is
type-checked against its category and stored in beta-normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import dsl
from .dsl import (
    Pos,
    SApp,
    SAnd,
    SBaseDecl,
    SCat,
    SCatBackslash,
    SCatName,
    SCatSlash,
    SEq,
    SExpr,
    SLam,
    SLex,
    SMacro,
    SMacroDef,
    SNot,
    SOr,
    SRef,
    STransform,
    STruth,
)
from .terms import (
    Apply,
    Arrow,
    Term,
    Type,
    alpha_eq,
    beta_normalize,
    term_text,
    type_text,
)
from .typecheck import check_entry


class GrammarError(Exception):
    """A grammar-level error: undeclared names, macro misuse, duplicates."""

    def __init__(self, message: str, pos: Pos | None = None,
                 filename: str | None = None):
        self.message = message
        self.pos = pos
        self.filename = filename or "<grammar>"
        if pos is not None:
            super().__init__(f"{self.filename}:{pos.line}:{pos.col}: {message}")
        else:
            super().__init__(f"{self.filename}: {message}")


# --------------------------------------------------------------------------
# categories


class Category:
    """Base class for category shapes."""


@dataclass(frozen=True)
class BaseCat(Category):
    name: str


@dataclass(frozen=True)
class Slash(Category):
    """A/B: seeks a B to its right, yielding an A."""

    result: Category
    arg: Category


@dataclass(frozen=True)
class Backslash(Category):
    """B\\A: seeks a B to its left, yielding an A."""

    arg: Category
    result: Category


def cat_text(c: Category) -> str:
    """Render a category; compound subparts are always parenthesized."""

    def part(s: Category) -> str:
        txt = cat_text(s)
        return txt if isinstance(s, BaseCat) else f"({txt})"

    if isinstance(c, BaseCat):
        return c.name
    if isinstance(c, Slash):
        return f"{part(c.result)}/{part(c.arg)}"
    if isinstance(c, Backslash):
        return f"{part(c.arg)}\\{part(c.result)}"
    raise GrammarError(f"not a category: {c!r}")


# --------------------------------------------------------------------------
# grammar proper


@dataclass(frozen=True)
class Transformation:
    """A unary rule: rewrites a source-category edge into the target."""

    source: Category
    target: Category
    combinator: Term
    index: int


@dataclass(frozen=True)
class LexEntry:
    word: str
    cat: Category
    sem: Term
    id: int


@dataclass(frozen=True)
class Grammar:
    """An immutable loaded grammar.

    base_decls keeps the declaration block in source order for printing;
    base_types and aliases are the same declarations split by kind.
    macros hold the pre-expansion definitions only: the lexicon and the
    transformations are stored fully expanded and beta-normal.
    """

    base_decls: tuple = ()
    base_types: dict = field(default_factory=dict)
    aliases: dict = field(default_factory=dict)
    transformations: tuple = ()
    lexicon: tuple = ()
    macros: dict = field(default_factory=dict)
    warnings: tuple = ()
    filename: str = "<grammar>"

    def __post_init__(self):
        by_word: dict = {}
        for entry in self.lexicon:
            by_word.setdefault(entry.word, []).append(entry)
        object.__setattr__(self, "_by_word",
                           {w: tuple(es) for w, es in by_word.items()})

    def entries_for(self, word: str) -> tuple:
        return getattr(self, "_by_word").get(word, ())


def _upsilon(base_types: dict, aliases: dict, c: Category) -> Type:
    if isinstance(c, BaseCat):
        if c.name in base_types:
            return base_types[c.name]
        if c.name in aliases:
            return _upsilon(base_types, aliases, aliases[c.name])
        raise GrammarError(f"category '{c.name}' has no declared type")
    if isinstance(c, Slash):
        return Arrow(_upsilon(base_types, aliases, c.arg),
                     _upsilon(base_types, aliases, c.result))
    if isinstance(c, Backslash):
        return Arrow(_upsilon(base_types, aliases, c.arg),
                     _upsilon(base_types, aliases, c.result))
    raise GrammarError(f"not a category: {c!r}")


def upsilon(g: Grammar, c: Category) -> Type:
    """Type of a category: functor categories map to arrow types."""
    return _upsilon(g.base_types, g.aliases, c)


# --------------------------------------------------------------------------
# macro expansion (purely syntactic, on surface expressions)


def _sfree_names(e: SExpr) -> frozenset:
    """Names free in a surface expression; features do not count."""
    if isinstance(e, SRef):
        return frozenset((e.base,))
    if isinstance(e, SLam):
        return _sfree_names(e.body) - {e.binder}
    if isinstance(e, SApp):
        return _sfree_names(e.fun) | _sfree_names(e.arg)
    if isinstance(e, (SAnd, SOr)):
        return _sfree_names(e.left) | _sfree_names(e.right)
    if isinstance(e, SNot):
        return _sfree_names(e.expr)
    if isinstance(e, SEq):
        return _sfree_names(e.lhs) | _sfree_names(e.rhs)
    if isinstance(e, SMacro):
        out: frozenset = frozenset()
        for a in e.args:
            out |= _sfree_names(a)
        return out
    return frozenset()


def _fresh_surface(base: str, taken: frozenset) -> str:
    n = 1
    while f"{base}_{n}" in taken:
        n += 1
    return f"{base}_{n}"


def _ssub(e: SExpr, mapping: dict, filename: str) -> SExpr:
    """Substitute macro parameters, renaming binders to avoid capture."""
    if not mapping:
        return e
    if isinstance(e, SRef):
        if e.base not in mapping:
            return e
        rep = mapping[e.base]
        if not e.path:
            return rep
        if isinstance(rep, SRef):
            return SRef(rep.base, rep.path + e.path, e.pos)
        raise GrammarError(
            f"macro argument for '{e.base}' is used with a feature path "
            f"but is not a node reference", e.pos, filename)
    if isinstance(e, SLam):
        inner = {k: v for k, v in mapping.items() if k != e.binder}
        if not inner:
            return e
        avoid: frozenset = frozenset()
        for v in inner.values():
            avoid |= _sfree_names(v)
        body = e.body
        binder = e.binder
        if binder in avoid:
            taken = avoid | _sfree_names(body) | frozenset(inner)
            fresh = _fresh_surface(binder, taken)
            body = _ssub(body, {binder: SRef(fresh, (), e.pos)}, filename)
            binder = fresh
        return SLam(binder, _ssub(body, inner, filename), e.pos)
    if isinstance(e, SApp):
        return SApp(_ssub(e.fun, mapping, filename),
                    _ssub(e.arg, mapping, filename), e.pos)
    if isinstance(e, SAnd):
        return SAnd(_ssub(e.left, mapping, filename),
                    _ssub(e.right, mapping, filename), e.pos)
    if isinstance(e, SOr):
        return SOr(_ssub(e.left, mapping, filename),
                   _ssub(e.right, mapping, filename), e.pos)
    if isinstance(e, SNot):
        return SNot(_ssub(e.expr, mapping, filename), e.pos)
    if isinstance(e, SEq):
        lhs = _ssub(e.lhs, mapping, filename)
        rhs = _ssub(e.rhs, mapping, filename)
        if not isinstance(lhs, SRef) or not isinstance(rhs, SRef):
            raise GrammarError(
                "an equation side must still be a node reference after "
                "macro expansion", e.pos, filename)
        return SEq(lhs, rhs, e.negated, e.pos)
    if isinstance(e, SMacro):
        return SMacro(e.name,
                      tuple(_ssub(a, mapping, filename) for a in e.args),
                      e.pos)
    return e


def expand_macros(e: SExpr, macros: dict, filename: str = "<grammar>",
                  _stack: tuple = ()) -> SExpr:
    """Expand every macro call in a surface expression.

    Arguments beyond a macro's declared parameters are applied to the
    expanded body, so a nullary agreement macro can be written either
    bare or in call position.  Definitions must precede uses, which
    already rules out cycles; the stack check guards the invariant.
    """
    if isinstance(e, SMacro):
        if e.name not in macros:
            raise GrammarError(f"undefined macro '{e.name}'", e.pos, filename)
        if e.name in _stack:
            raise GrammarError(f"macro '{e.name}' expands through itself",
                               e.pos, filename)
        params, body = macros[e.name]
        if len(e.args) < len(params):
            raise GrammarError(
                f"macro '{e.name}' expects {len(params)} argument(s), "
                f"got {len(e.args)}", e.pos, filename)
        eargs = [expand_macros(a, macros, filename, _stack) for a in e.args]
        mapping = dict(zip(params, eargs[: len(params)]))
        out = _ssub(body, mapping, filename)
        out = expand_macros(out, macros, filename, _stack + (e.name,))
        for extra in eargs[len(params):]:
            out = SApp(out, extra, e.pos)
        return out
    if isinstance(e, SLam):
        return SLam(e.binder, expand_macros(e.body, macros, filename, _stack),
                    e.pos)
    if isinstance(e, SApp):
        return SApp(expand_macros(e.fun, macros, filename, _stack),
                    expand_macros(e.arg, macros, filename, _stack), e.pos)
    if isinstance(e, SAnd):
        return SAnd(expand_macros(e.left, macros, filename, _stack),
                    expand_macros(e.right, macros, filename, _stack), e.pos)
    if isinstance(e, SOr):
        return SOr(expand_macros(e.left, macros, filename, _stack),
                   expand_macros(e.right, macros, filename, _stack), e.pos)
    if isinstance(e, SNot):
        return SNot(expand_macros(e.expr, macros, filename, _stack), e.pos)
    return e


# --------------------------------------------------------------------------
# loading


def _to_category(sc: SCat, base_types: dict, aliases: dict,
                 filename: str) -> Category:
    if isinstance(sc, SCatName):
        if sc.name in aliases:
            return aliases[sc.name]
        if sc.name in base_types:
            return BaseCat(sc.name)
        raise GrammarError(f"undeclared category '{sc.name}'", sc.pos,
                           filename)
    if isinstance(sc, SCatSlash):
        return Slash(_to_category(sc.result, base_types, aliases, filename),
                     _to_category(sc.arg, base_types, aliases, filename))
    if isinstance(sc, SCatBackslash):
        return Backslash(_to_category(sc.arg, base_types, aliases, filename),
                         _to_category(sc.result, base_types, aliases,
                                      filename))
    raise GrammarError(f"not a category expression: {sc!r}")


def parse_grammar(src: str, filename: str = "<grammar>") -> Grammar:
    """Parse, macro-expand, type-check, and normalize a grammar source."""
    stmts = dsl.parse_grammar_source(src, filename)
    base_decls: list = []
    base_types: dict = {}
    aliases: dict = {}
    macros: dict = {}
    transformations: list = []
    lexicon: list = []
    warnings: list = []

    for st in stmts:
        if isinstance(st, SBaseDecl):
            for name, rhs, pos in st.items:
                if name in base_types or name in aliases:
                    raise GrammarError(f"category '{name}' declared twice",
                                       pos, filename)
                if isinstance(rhs, Type):
                    base_types[name] = rhs
                    base_decls.append((name, rhs))
                else:
                    cat = _to_category(rhs, base_types, aliases, filename)
                    aliases[name] = cat
                    base_decls.append((name, cat))
        elif isinstance(st, SMacroDef):
            if st.name in macros:
                raise GrammarError(f"macro '{st.name}' defined twice", st.pos,
                                   filename)
            macros[st.name] = (st.params, st.body)
        elif isinstance(st, STransform):
            source = _to_category(st.source, base_types, aliases, filename)
            target = _to_category(st.target, base_types, aliases, filename)
            expected = Arrow(_upsilon(base_types, aliases, source),
                             _upsilon(base_types, aliases, target))
            surface = expand_macros(st.combinator, macros, filename)
            label = (f"transformation {cat_text(source)} = "
                     f"{cat_text(target)}")
            comb = beta_normalize(check_entry(label, expected, surface,
                                              filename))
            transformations.append(
                Transformation(source, target, comb, len(transformations)))
        elif isinstance(st, SLex):
            cat = _to_category(st.cat, base_types, aliases, filename)
            expected = _upsilon(base_types, aliases, cat)
            surface = expand_macros(st.sem, macros, filename)
            sem = beta_normalize(check_entry(f"lex {st.word}", expected,
                                             surface, filename))
            lexicon.append(LexEntry(st.word, cat, sem, len(lexicon)))
        else:
            raise GrammarError(f"unknown statement: {st!r}")

    if not lexicon:
        warnings.append("no lexicon")
    return Grammar(base_decls=tuple(base_decls), base_types=base_types,
                   aliases=aliases, transformations=tuple(transformations),
                   lexicon=tuple(lexicon), macros=macros,
                   warnings=tuple(warnings), filename=filename)


def load_grammar(path: str) -> Grammar:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_grammar(fh.read(), filename=str(path))


def parse_category(g: Grammar, text: str) -> Category:
    """Parse a category expression against a loaded grammar's names."""
    sc = dsl.parse_cat(text, "<category>")
    return _to_category(sc, g.base_types, g.aliases, "<category>")


# --------------------------------------------------------------------------
# unary rules


def apply_transformation(rule: Transformation, cat: Category,
                         sem: Term):
    """Rewrite (cat, sem) through a unary rule, or return None."""
    if cat != rule.source:
        return None
    return rule.target, beta_normalize(Apply(rule.combinator, sem))


# --------------------------------------------------------------------------
# printing


def grammar_text(g: Grammar) -> str:
    """Render a grammar back to DSL source.

    Macros are not reprinted: the lexicon is stored expanded, so the
    output declares the same entries with their normal-form semantics.
    Re-parsing the output yields an equal grammar up to macros (see
    grammars_equal).
    """
    lines: list = []
    if g.base_decls:
        lines.append("Base_Categories")
        for i, (name, rhs) in enumerate(g.base_decls):
            end = ";" if i == len(g.base_decls) - 1 else ","
            body = type_text(rhs) if isinstance(rhs, Type) else cat_text(rhs)
            lines.append(f"    {name} = {body}{end}")
    for t in g.transformations:
        lines.append(f"transformation {cat_text(t.source)} = "
                     f"{cat_text(t.target)} : {term_text(t.combinator)};")
    for e in g.lexicon:
        lines.append(f"lex {e.word}, {cat_text(e.cat)}, {term_text(e.sem)};")
    return "\n".join(lines) + "\n"


def grammars_equal(a: Grammar, b: Grammar) -> bool:
    """Structural equality over declarations, rules, and entries.

    Semantics are compared up to bound-variable renaming; the macro
    tables are ignored since entries are stored expanded.
    """
    if a.base_decls != b.base_decls:
        return False
    if len(a.transformations) != len(b.transformations):
        return False
    for ta, tb in zip(a.transformations, b.transformations):
        if ta.source != tb.source or ta.target != tb.target:
            return False
        if not alpha_eq(ta.combinator, tb.combinator):
            return False
    if len(a.lexicon) != len(b.lexicon):
        return False
    for ea, eb in zip(a.lexicon, b.lexicon):
        if ea.word != eb.word or ea.cat != eb.cat:
            return False
        if not alpha_eq(ea.sem, eb.sem):
            return False
    return True
