"""Grammar source syntax: lexer, surface syntax trees, and parsers.

Statements end with ``;`` and ``%`` comments run to end of line:

    Base_Categories name = (type-expr | cat-expr) {, name = ...} ;
    transformation cat-expr = cat-expr : sem-expr ;
    let NAME [( params )] = sem-expr ;
    lex word , cat-expr , sem-expr ;

Semantic expressions use ``\\x.`` for abstraction (binders may chain, as
in ``\\X\\Y. e``), juxtaposition for application, ``&``, ``|``, ``~`` for
the connectives, and ``ref = ref`` / ``ref \\= ref`` for equations where
a ref is a dotted identifier chain.  Binder kinds are not written; the
type checker infers them.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .terms import Arrow, Bool, BOOL, FsArrow, Type


class DslSyntaxError(Exception):
    def __init__(self, message: str, line: int, col: int, filename: str = "<string>"):
        super().__init__(f"{filename}:{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col
        self.filename = filename


# --------------------------------------------------------------------------
# lexer

_PUNCT = {
    "(": "LPAREN", ")": "RPAREN", ",": "COMMA", ";": "SEMI", ".": "DOT",
    "&": "AND", "|": "OR", "~": "NOT", "/": "SLASH", ":": "COLON",
    "=": "EQ",
}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def _is_ident_start(ch: str) -> bool:
    return ch.isalnum() and ch.isascii()


def _is_ident_char(ch: str) -> bool:
    return (ch.isalnum() or ch == "_") and ch.isascii()


def tokenize(src: str, filename: str = "<string>") -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(src)
    while i < n:
        ch = src[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and src[i] != "\n":
                i += 1
            continue
        if ch == "\\":
            if i + 1 < n and src[i + 1] == "=":
                toks.append(Token("NEQ", "\\=", line, col))
                i += 2
                col += 2
            else:
                toks.append(Token("BACKSLASH", "\\", line, col))
                i += 1
                col += 1
            continue
        if ch == "-":
            if i + 1 < n and src[i + 1] == ">":
                toks.append(Token("ARROW", "->", line, col))
                i += 2
                col += 2
                continue
            raise DslSyntaxError("stray '-' (did you mean '->'?)",
                                 line, col, filename)
        if ch in _PUNCT:
            toks.append(Token(_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch == "_":
            raise DslSyntaxError(
                "names starting with '_' are reserved", line, col, filename)
        if _is_ident_start(ch):
            j = i
            while j < n and _is_ident_char(src[j]):
                j += 1
            toks.append(Token("IDENT", src[i:j], line, col))
            col += j - i
            i = j
            continue
        raise DslSyntaxError(f"unexpected character {ch!r}", line, col, filename)
    toks.append(Token("EOF", "", line, col))
    return toks


# --------------------------------------------------------------------------
# surface syntax trees


@dataclass(frozen=True)
class Pos:
    line: int
    col: int


class SExpr:
    __slots__ = ()


@dataclass(frozen=True)
class SRef(SExpr):
    """Dotted identifier chain; a bare identifier has an empty path."""

    base: str
    path: tuple
    pos: Pos


@dataclass(frozen=True)
class SLam(SExpr):
    binder: str
    body: SExpr
    pos: Pos


@dataclass(frozen=True)
class SApp(SExpr):
    fun: SExpr
    arg: SExpr
    pos: Pos


@dataclass(frozen=True)
class SAnd(SExpr):
    left: SExpr
    right: SExpr
    pos: Pos


@dataclass(frozen=True)
class SOr(SExpr):
    left: SExpr
    right: SExpr
    pos: Pos


@dataclass(frozen=True)
class SNot(SExpr):
    expr: SExpr
    pos: Pos


@dataclass(frozen=True)
class SEq(SExpr):
    lhs: SRef
    rhs: SRef
    negated: bool
    pos: Pos


@dataclass(frozen=True)
class STruth(SExpr):
    value: bool
    pos: Pos


@dataclass(frozen=True)
class SMacro(SExpr):
    name: str
    args: tuple
    pos: Pos


class SCat:
    __slots__ = ()


@dataclass(frozen=True)
class SCatName(SCat):
    name: str
    pos: Pos


@dataclass(frozen=True)
class SCatSlash(SCat):
    result: SCat
    arg: SCat
    pos: Pos


@dataclass(frozen=True)
class SCatBackslash(SCat):
    arg: SCat
    result: SCat
    pos: Pos


@dataclass(frozen=True)
class SBaseDecl:
    items: tuple  # of (name, Type | SCat, Pos)
    pos: Pos


@dataclass(frozen=True)
class STransform:
    source: SCat
    target: SCat
    combinator: SExpr
    pos: Pos


@dataclass(frozen=True)
class SMacroDef:
    name: str
    params: tuple
    body: SExpr
    pos: Pos


@dataclass(frozen=True)
class SLex:
    word: str
    cat: SCat
    sem: SExpr
    pos: Pos


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, toks: list[Token], filename: str,
                 macro_names: set | None = None):
        self.toks = toks
        self.i = 0
        self.filename = filename
        # macro names seen so far; definitions must precede their uses
        self.macros: set = set(macro_names or ())

    # -- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "EOF":
            self.i += 1
        return t

    def at(self, kind: str) -> bool:
        return self.peek().kind == kind

    def expect(self, kind: str, what: str) -> Token:
        t = self.peek()
        if t.kind != kind:
            self.fail(f"expected {what}, found {t.text!r}" if t.text
                      else f"expected {what}, found end of input", t)
        return self.next()

    def fail(self, message: str, tok: Token | None = None) -> None:
        tok = tok or self.peek()
        raise DslSyntaxError(message, tok.line, tok.col, self.filename)

    @staticmethod
    def pos(tok: Token) -> Pos:
        return Pos(tok.line, tok.col)

    # -- statements

    def parse_statements(self) -> list:
        stmts = []
        while not self.at("EOF"):
            stmts.append(self.statement())
        return stmts

    def statement(self):
        t = self.peek()
        if t.kind != "IDENT":
            self.fail(f"expected a statement, found {t.text!r}", t)
        if t.text == "Base_Categories":
            return self.base_decl()
        if t.text == "transformation":
            return self.transform_decl()
        if t.text == "let":
            return self.macro_def()
        if t.text == "lex":
            return self.lex_decl()
        self.fail(f"unknown statement keyword {t.text!r}", t)

    def base_decl(self) -> SBaseDecl:
        head = self.next()
        items = []
        while True:
            name = self.expect("IDENT", "a category name")
            self.expect("EQ", "'='")
            rhs = self.base_rhs()
            items.append((name.text, rhs, self.pos(name)))
            if self.at("COMMA"):
                self.next()
                continue
            self.expect("SEMI", "';'")
            break
        return SBaseDecl(tuple(items), self.pos(head))

    def _rhs_is_type(self) -> bool:
        # scan to the item terminator: a type mentions fs, bool or ->
        depth = 0
        j = self.i
        while j < len(self.toks):
            t = self.toks[j]
            if t.kind == "LPAREN":
                depth += 1
            elif t.kind == "RPAREN":
                depth -= 1
            elif depth == 0 and t.kind in ("COMMA", "SEMI", "EOF"):
                return False
            if t.kind == "ARROW" or (t.kind == "IDENT"
                                     and t.text in ("fs", "bool")):
                return True
            j += 1
        return False

    def base_rhs(self):
        if self._rhs_is_type():
            return self.type_expr()
        return self.cat_expr()

    def transform_decl(self) -> STransform:
        head = self.next()
        source = self.cat_expr()
        self.expect("EQ", "'='")
        target = self.cat_expr()
        self.expect("COLON", "':'")
        comb = self.sem_expr()
        self.expect("SEMI", "';'")
        return STransform(source, target, comb, self.pos(head))

    def macro_def(self) -> SMacroDef:
        head = self.next()
        name = self.expect("IDENT", "a macro name")
        params: list = []
        if self.at("LPAREN"):
            self.next()
            while True:
                p = self.expect("IDENT", "a parameter name")
                if p.text in params:
                    self.fail(f"duplicate parameter {p.text!r}", p)
                params.append(p.text)
                if self.at("COMMA"):
                    self.next()
                    continue
                break
            self.expect("RPAREN", "')'")
        self.expect("EQ", "'='")
        body = self.sem_expr(scope=frozenset(params))
        self.expect("SEMI", "';'")
        self.macros.add(name.text)
        return SMacroDef(name.text, tuple(params), body, self.pos(head))

    def lex_decl(self) -> SLex:
        head = self.next()
        word = self.expect("IDENT", "a word")
        self.expect("COMMA", "','")
        cat = self.cat_expr()
        self.expect("COMMA", "','")
        sem = self.sem_expr()
        self.expect("SEMI", "';'")
        return SLex(word.text, cat, sem, self.pos(head))

    # -- type expressions (right-associative ->; fs only left of ->)

    def type_expr(self) -> Type:
        t = self.peek()
        left_is_fs = False
        if self.at("IDENT") and t.text == "fs":
            self.next()
            left_is_fs = True
            left: Type | None = None
        else:
            left = self.type_primary()
        if self.at("ARROW"):
            self.next()
            result = self.type_expr()
            return FsArrow(result) if left_is_fs else Arrow(left, result)
        if left_is_fs:
            self.fail("'fs' is only a domain; expected '->'", t)
        return left

    def type_primary(self) -> Type:
        t = self.peek()
        if self.at("LPAREN"):
            self.next()
            inner = self.type_expr()
            self.expect("RPAREN", "')'")
            return inner
        if self.at("IDENT") and t.text == "bool":
            self.next()
            return BOOL
        self.fail(f"expected a type, found {t.text!r}", t)

    # -- category expressions (/ and \ non-associative)

    def cat_expr(self) -> SCat:
        left = self.cat_primary()
        if self.at("SLASH"):
            op = self.next()
            right = self.cat_primary()
            self.no_more_slash(op)
            return SCatSlash(left, right, self.pos(op))
        if self.at("BACKSLASH"):
            op = self.next()
            right = self.cat_primary()
            self.no_more_slash(op)
            return SCatBackslash(left, right, self.pos(op))
        return left

    def no_more_slash(self, op: Token) -> None:
        if self.peek().kind in ("SLASH", "BACKSLASH"):
            self.fail("category slashes are non-associative; add parentheses",
                      self.peek())

    def cat_primary(self) -> SCat:
        t = self.peek()
        if self.at("LPAREN"):
            self.next()
            inner = self.cat_expr()
            self.expect("RPAREN", "')'")
            return inner
        if self.at("IDENT"):
            self.next()
            return SCatName(t.text, self.pos(t))
        self.fail(f"expected a category, found {t.text!r}", t)

    # -- semantic expressions

    def sem_expr(self, scope: frozenset = frozenset()) -> SExpr:
        return self.sem_or(scope)

    # connectives associate to the right, matching the printer's habit
    # of parenthesizing only left-nested operands

    def sem_or(self, scope: frozenset) -> SExpr:
        left = self.sem_and(scope)
        if self.at("OR"):
            op = self.next()
            right = self.sem_or(scope)
            return SOr(left, right, self.pos(op))
        return left

    def sem_and(self, scope: frozenset) -> SExpr:
        left = self.sem_unary(scope)
        if self.at("AND"):
            op = self.next()
            right = self.sem_and(scope)
            return SAnd(left, right, self.pos(op))
        return left

    def sem_unary(self, scope: frozenset) -> SExpr:
        t = self.peek()
        if self.at("NOT"):
            self.next()
            return SNot(self.sem_unary(scope), self.pos(t))
        if self.at("BACKSLASH"):
            return self.sem_lambda(scope)
        return self.sem_app(scope)

    def sem_lambda(self, scope: frozenset) -> SExpr:
        # \x. e, with chains \x\y. e standing for \x. \y. e
        lam = self.next()
        binders = [self.expect("IDENT", "a binder name")]
        while self.at("BACKSLASH"):
            self.next()
            binders.append(self.expect("IDENT", "a binder name"))
        self.expect("DOT", "'.' after binder")
        inner_scope = scope | {b.text for b in binders}
        body = self.sem_or(inner_scope)
        for b in reversed(binders):
            body = SLam(b.text, body, self.pos(b))
        return body

    _ATOM_STARTS = ("IDENT", "LPAREN")

    def sem_app(self, scope: frozenset) -> SExpr:
        expr = self.sem_atom(scope)
        while self.peek().kind in self._ATOM_STARTS or self.at("BACKSLASH"):
            if self.at("BACKSLASH"):
                # an abstraction argument must be parenthesised; seeing one
                # here is a stray category backslash or missing parens
                self.fail("abstraction as an argument needs parentheses")
            arg = self.sem_atom(scope)
            expr = SApp(expr, arg, self.pos(self.peek(-1)))
        return expr

    def sem_atom(self, scope: frozenset) -> SExpr:
        t = self.peek()
        if self.at("LPAREN"):
            self.next()
            inner = self.sem_or(scope)
            self.expect("RPAREN", "')'")
            return self.maybe_eq(inner, t, scope)
        if self.at("IDENT"):
            if t.text in ("true", "false"):
                self.next()
                return STruth(t.text == "true", self.pos(t))
            if (t.text in self.macros and t.text not in scope):
                return self.macro_use(scope)
            ref = self.ref()
            return self.maybe_eq(ref, t, scope)
        self.fail(f"expected an expression, found {t.text!r}", t)

    def macro_use(self, scope: frozenset) -> SExpr:
        name = self.next()
        args: list = []
        if self.at("LPAREN"):
            self.next()
            while True:
                args.append(self.sem_or(scope))
                if self.at("COMMA"):
                    self.next()
                    continue
                break
            self.expect("RPAREN", "')'")
        return SMacro(name.text, tuple(args), self.pos(name))

    def ref(self) -> SRef:
        base = self.expect("IDENT", "an identifier")
        path = []
        while self.at("DOT"):
            self.next()
            path.append(self.expect("IDENT", "a feature name").text)
        return SRef(base.text, tuple(path), self.pos(base))

    def maybe_eq(self, left: SExpr, start: Token, scope: frozenset) -> SExpr:
        if self.peek().kind not in ("EQ", "NEQ"):
            return left
        op = self.next()
        if not isinstance(left, SRef):
            self.fail("the left side of an equation must be a node reference",
                      op)
        rhs = self.ref()
        return SEq(left, rhs, op.kind == "NEQ", self.pos(op))


# --------------------------------------------------------------------------
# entry points


def parse_grammar_source(src: str, filename: str = "<string>") -> list:
    """Parse a whole grammar file into surface statements."""
    return _Parser(tokenize(src, filename), filename).parse_statements()


def parse_sem(src: str, filename: str = "<string>",
              macro_names: set | None = None) -> SExpr:
    """Parse a single semantic expression (for tests and the CLI)."""
    p = _Parser(tokenize(src, filename), filename, macro_names)
    expr = p.sem_expr()
    p.expect("EOF", "end of input")
    return expr


def parse_cat(src: str, filename: str = "<string>") -> SCat:
    p = _Parser(tokenize(src, filename), filename)
    cat = p.cat_expr()
    p.expect("EOF", "end of input")
    return cat


def parse_type(src: str, filename: str = "<string>") -> Type:
    p = _Parser(tokenize(src, filename), filename)
    t = p.type_expr()
    p.expect("EOF", "end of input")
    return t
