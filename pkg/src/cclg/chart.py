"""Bottom-up chart parser over the categorial backbone.

Edges record only categories and derivation references; semantics are
rebuilt on demand from the references, so the backbone is cheap unless
the satisfiability gate is interleaved into construction.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .grammar import (
    Backslash,
    Category,
    Grammar,
    Slash,
    apply_transformation,
)
from .solver import SolverState, satisfiable, solve
from .terms import Apply, Term, alpha_eq, beta_normalize


class ChartError(Exception):
    pass


class UnknownWordError(ChartError):
    def __init__(self, words):
        self.words = tuple(words)
        super().__init__("unknown word(s): " + ", ".join(self.words))


# --------------------------------------------------------------------------
# edges


@dataclass(frozen=True)
class Lex:
    """The edge quotes lexicon entry ``entry``."""

    entry: int


@dataclass(frozen=True)
class Binary:
    """The edge combines two daughters by an application rule."""

    left: int
    right: int
    rule: str  # "app/" or "app\\"


@dataclass(frozen=True)
class Unary:
    """The edge rewrites a source edge through a transformation."""

    source: int
    transformation: int


@dataclass(frozen=True)
class Edge:
    begin: int
    end: int
    cat: Category
    sref: object
    id: int


class Chart:
    """Edge store indexed by span and by id, plus the unary agenda."""

    def __init__(self, tokens, grammar: Grammar):
        self.tokens = tuple(tokens)
        self.grammar = grammar
        self.edges: list = []
        self.agenda: deque = deque()
        self._by_span: dict = {}
        self._keys: set = set()
        self._sem: dict = {}

    def _add(self, begin: int, end: int, cat: Category, sref) -> Edge | None:
        key = (begin, end, cat, sref)
        if key in self._keys:
            return None
        edge = Edge(begin, end, cat, sref, len(self.edges))
        self.edges.append(edge)
        self._by_span.setdefault((begin, end), []).append(edge)
        self._keys.add(key)
        self.agenda.append(edge.id)
        return edge

    def edges_at(self, begin: int, end: int) -> tuple:
        return tuple(self._by_span.get((begin, end), ()))

    def spanning(self, cat: Category) -> tuple:
        return tuple(e for e in self.edges_at(0, len(self.tokens))
                     if e.cat == cat)


# --------------------------------------------------------------------------
# combination


_INTERLEAVE_DEFAULT = False


def set_interleaving(on: bool) -> None:
    """Default for the satisfiability gate during backbone building."""
    global _INTERLEAVE_DEFAULT
    _INTERLEAVE_DEFAULT = bool(on)


def _match(left_cat: Category, right_cat: Category, rule: str):
    """Result category of one application rule, or None."""
    if rule == "app/":
        if isinstance(left_cat, Slash) and left_cat.arg == right_cat:
            return left_cat.result
        return None
    if rule == "app\\":
        if isinstance(right_cat, Backslash) and right_cat.arg == left_cat:
            return right_cat.result
        return None
    raise ChartError(f"unknown application rule {rule!r}")


def combine(g: Grammar, fun, arg, rule: str, gate: bool = False,
            mode: str = "complete"):
    """Apply a functor (category, term) pair to an argument pair.

    Returns the result pair, or None on category mismatch or, when the
    gate is on, on an unsatisfiable result.
    """
    fcat, fsem = fun
    acat, asem = arg
    if rule == "app/":
        ok = isinstance(fcat, Slash) and fcat.arg == acat
    elif rule == "app\\":
        ok = isinstance(fcat, Backslash) and fcat.arg == acat
    else:
        raise ChartError(f"unknown application rule {rule!r}")
    if not ok:
        return None
    sem = beta_normalize(Apply(fsem, asem))
    if gate and not satisfiable(sem, mode=mode):
        return None
    return fcat.result, sem


def edge_sem(chart: Chart, edge_id: int) -> Term:
    """Beta-normal semantics of an edge, rebuilt from its reference."""
    if edge_id in chart._sem:
        return chart._sem[edge_id]
    g = chart.grammar
    edge = chart.edges[edge_id]
    sref = edge.sref
    if isinstance(sref, Lex):
        sem = g.lexicon[sref.entry].sem
    elif isinstance(sref, Unary):
        child = chart.edges[sref.source]
        out = apply_transformation(g.transformations[sref.transformation],
                                   child.cat, edge_sem(chart, sref.source))
        if out is None:
            raise ChartError("unary edge references a non-matching rule")
        sem = out[1]
    elif isinstance(sref, Binary):
        left = chart.edges[sref.left]
        right = chart.edges[sref.right]
        fun, arg = ((left, right) if sref.rule == "app/" else (right, left))
        out = combine(g, (fun.cat, edge_sem(chart, fun.id)),
                      (arg.cat, edge_sem(chart, arg.id)), sref.rule)
        if out is None:
            raise ChartError("binary edge references non-combining daughters")
        sem = out[1]
    else:
        raise ChartError(f"unknown edge reference {sref!r}")
    chart._sem[edge_id] = sem
    return sem


# --------------------------------------------------------------------------
# parsing


def _close_unary(chart: Chart) -> None:
    g = chart.grammar
    while chart.agenda:
        eid = chart.agenda.popleft()
        edge = chart.edges[eid]
        if isinstance(edge.sref, Unary):
            continue
        for rule in g.transformations:
            if edge.cat == rule.source:
                chart._add(edge.begin, edge.end, rule.target,
                           Unary(edge.id, rule.index))


def parse_sentence(g: Grammar, tokens, interleave: bool | None = None,
                   mode: str = "complete") -> Chart:
    """Build the chart closure over a token sequence."""
    if interleave is None:
        interleave = _INTERLEAVE_DEFAULT
    tokens = tuple(tokens)
    if not tokens:
        raise ChartError("empty token sequence")
    unknown = sorted({w for w in tokens if not g.entries_for(w)})
    if unknown:
        raise UnknownWordError(unknown)

    chart = Chart(tokens, g)
    for i, word in enumerate(tokens):
        for entry in g.entries_for(word):
            edge = chart._add(i, i + 1, entry.cat, Lex(entry.id))
            if edge is not None:
                chart._sem[edge.id] = entry.sem
    _close_unary(chart)

    n = len(tokens)
    for length in range(2, n + 1):
        for begin in range(0, n - length + 1):
            end = begin + length
            for k in range(begin + 1, end):
                for left in chart.edges_at(begin, k):
                    for right in chart.edges_at(k, end):
                        for rule in ("app/", "app\\"):
                            cat = _match(left.cat, right.cat, rule)
                            if cat is None:
                                continue
                            sref = Binary(left.id, right.id, rule)
                            if (begin, end, cat, sref) in chart._keys:
                                continue
                            if interleave:
                                fun, arg = ((left, right) if rule == "app/"
                                            else (right, left))
                                out = combine(
                                    g, (fun.cat, edge_sem(chart, fun.id)),
                                    (arg.cat, edge_sem(chart, arg.id)),
                                    rule, gate=True, mode=mode)
                                if out is None:
                                    continue
                                edge = chart._add(begin, end, cat, sref)
                                if edge is not None:
                                    chart._sem[edge.id] = out[1]
                            else:
                                chart._add(begin, end, cat, sref)
            _close_unary(chart)
    return chart


# --------------------------------------------------------------------------
# readings


@dataclass(frozen=True)
class Derivation:
    """One derivation node mirroring an edge's reference."""

    edge_id: int
    span: tuple
    cat: Category
    rule: str  # "lex", "app/", "app\\", or "transform"
    ref: int  # lexicon entry id, transformation index, or -1
    word: str | None
    children: tuple
    sem: Term


@dataclass(frozen=True)
class Reading:
    derivation: Derivation
    term: Term
    state: SolverState


def derivation_of(chart: Chart, edge_id: int) -> Derivation:
    g = chart.grammar
    edge = chart.edges[edge_id]
    sref = edge.sref
    sem = edge_sem(chart, edge_id)
    span = (edge.begin, edge.end)
    if isinstance(sref, Lex):
        entry = g.lexicon[sref.entry]
        return Derivation(edge_id, span, edge.cat, "lex", sref.entry,
                          entry.word, (), sem)
    if isinstance(sref, Unary):
        child = derivation_of(chart, sref.source)
        return Derivation(edge_id, span, edge.cat, "transform",
                          sref.transformation, None, (child,), sem)
    if isinstance(sref, Binary):
        left = derivation_of(chart, sref.left)
        right = derivation_of(chart, sref.right)
        return Derivation(edge_id, span, edge.cat, sref.rule, -1, None,
                          (left, right), sem)
    raise ChartError(f"unknown edge reference {sref!r}")


def extract_readings(g: Grammar, chart: Chart, target: Category,
                     mode: str = "complete") -> list:
    """Solve each spanning edge of the target category.

    Readings whose residue is false are dropped; derivations whose
    semantics coincide up to bound renaming are reported once.
    """
    readings: list = []
    seen: list = []
    for edge in chart.spanning(target):
        sem = edge_sem(chart, edge.id)
        if any(alpha_eq(sem, old) for old in seen):
            continue
        seen.append(sem)
        state = solve(sem, mode=mode)
        if state.is_false:
            continue
        readings.append(Reading(derivation_of(chart, edge.id), sem, state))
    return readings


def derivation_text(d: Derivation, indent: int = 0) -> str:
    """Indented one-line-per-node rendering of a derivation tree."""
    from .grammar import cat_text

    pad = "  " * indent
    label = f"{pad}{cat_text(d.cat)} [{d.span[0]},{d.span[1]}]"
    if d.rule == "lex":
        line = f"{label} lex {d.word}"
    elif d.rule == "transform":
        line = f"{label} transform #{d.ref + 1}"
    else:
        line = f"{label} {d.rule}"
    parts = [line]
    for child in d.children:
        parts.append(derivation_text(child, indent + 1))
    return "\n".join(parts)
