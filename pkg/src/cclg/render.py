"""Textual views of solved forms and charts.

Canonical text lists one atomic fact per line with variables in
first-use order; the AVM view nests feature blocks with sharing tags
and ends with a constraint footer that re-parses to the same form.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from .chart import Binary, Chart, Lex, Unary
from .grammar import cat_text
from .solver import BOTTOM, SolvedForm, _validate, is_bottom
from .terms import Atom, FsVar


class RenderError(Exception):
    pass


# --------------------------------------------------------------------------
# canonical text


def _root_order(m: SolvedForm) -> list:
    order: list = []
    seen: set = set()
    for v in m.equalities:
        if v not in seen:
            seen.add(v)
            order.append(v)
    for v, _f in m.features:
        if v not in seen:
            seen.add(v)
            order.append(v)
    return order


def canonical_facts(m) -> list:
    """One fact per entry: eliminations first per root, then features."""
    if is_bottom(m):
        return ["false"]
    feats_of: dict = {}
    for (v, f), val in m.features.items():
        feats_of.setdefault(v, []).append((f, val))
    lines: list = []
    for v in _root_order(m):
        if v in m.equalities:
            lines.append(f"{v}={m.equalities[v].name}")
        for f, val in feats_of.get(v, ()):
            lines.append(f"{v}.{f}={val.name}")
    return lines


def canonical_text(m) -> str:
    return "\n".join(canonical_facts(m))


_FACT = re.compile(
    r"^([A-Za-z0-9_]+)(?:\.([A-Za-z0-9_]+))?=([A-Za-z0-9_]+)$")
_INTERNAL = re.compile(r"^_p\d+$")
_FRESH = re.compile(r"^x_\d+$")


def parse_canonical(text: str):
    """Rebuild a solved form from its canonical text.

    A name counts as a variable when it roots some fact or matches the
    fresh or internal naming patterns; anything else reads as an atom.
    """
    raw = [p.strip() for chunk in text.splitlines()
           for p in chunk.split(";")]
    lines = [p for p in raw if p and not p.startswith("%")]
    if lines == ["false"]:
        return BOTTOM
    triples: list = []
    for ln in lines:
        mt = _FACT.match(ln)
        if mt is None:
            raise RenderError(f"not a solved-form fact: {ln!r}")
        triples.append((mt.group(1), mt.group(2), mt.group(3)))
    roots = {base for base, _f, _r in triples}

    def ref(name: str):
        if name in roots or _INTERNAL.match(name) or _FRESH.match(name):
            return FsVar(name)
        return Atom(name)

    equalities: dict = {}
    features: dict = {}
    for base, feat, rhs in triples:
        if feat is None:
            if base in equalities:
                raise RenderError(f"variable {base} eliminated twice")
            equalities[base] = ref(rhs)
        else:
            key = (base, feat)
            if key in features:
                raise RenderError(f"duplicate fact for {base}.{feat}")
            features[key] = ref(rhs)
    names = set(roots)
    for val in list(equalities.values()) + list(features.values()):
        if isinstance(val, FsVar):
            names.add(val.name)
    internal = frozenset(n for n in names if _INTERNAL.match(n))
    counter = max((int(n[2:]) + 1 for n in internal), default=0)
    return _validate(SolvedForm(equalities, features, internal, counter))


# --------------------------------------------------------------------------
# attribute-value matrices


@dataclass(frozen=True)
class RenderedAVM:
    lines: tuple
    bindings: dict

    @property
    def text(self) -> str:
        return "\n".join(self.lines)


def _indent_under(head: str, sub: list) -> list:
    pad = " " * len(head)
    return [head + sub[0]] + [pad + s for s in sub[1:]]


def render_avm(m, roots=None) -> RenderedAVM:
    """Nested feature blocks per root, with #n tags for shared nodes."""
    if is_bottom(m):
        return RenderedAVM(("false",), {})

    feats_of: dict = {}
    for (v, f), val in m.features.items():
        feats_of.setdefault(v, []).append((f, val))

    indegree: dict = {}
    for val in list(m.equalities.values()) + list(m.features.values()):
        val = m.canon(val)
        if isinstance(val, FsVar):
            indegree[val.name] = indegree.get(val.name, 0) + 1
    shared = {n for n, k in indegree.items() if k >= 2}

    tags: dict = {}
    done: set = set()

    def tag_of(name: str) -> int:
        if name not in tags:
            tags[name] = len(tags) + 1
        return tags[name]

    def render_ref(val, stack: tuple) -> list:
        val = m.canon(val)
        if isinstance(val, Atom):
            return [val.name]
        name = val.name
        if name in stack or (name in done and name in shared):
            return [f"#{tag_of(name)}"]
        pairs = feats_of.get(name, [])
        if not pairs:
            done.add(name)
            if m.is_internal(name):
                return ["[]"]
            return [name]
        body: list = []
        for f, sub in pairs:
            body.extend(_indent_under(f"{f} = ",
                                      render_ref(sub, stack + (name,))))
        block = []
        for i, ln in enumerate(body):
            block.append(("[ " if i == 0 else "  ") + ln)
        block[-1] += " ]"
        done.add(name)
        if name in shared:
            block = _indent_under(f"#{tag_of(name)} ", block)
        return block

    if roots is None:
        roots = [v for v in _root_order(m) if not m.is_internal(v)]
    lines: list = []
    bindings: dict = {}
    for r in roots:
        sub = render_ref(FsVar(r), ())
        bindings[r] = "\n".join(sub)
        lines.extend(_indent_under(f"{r} = ", sub))
    lines.append("")
    lines.append("constraints:")
    lines.extend("  " + fact for fact in canonical_facts(m))
    return RenderedAVM(tuple(lines), bindings)


def avm_footer(avm_text: str) -> str:
    """The constraint footer of an AVM rendering."""
    parts = avm_text.splitlines()
    try:
        i = parts.index("constraints:")
    except ValueError:
        raise RenderError("no constraint footer") from None
    return "\n".join(parts[i + 1:])


# --------------------------------------------------------------------------
# chart exports


def forest_dot(chart: Chart) -> str:
    """GraphViz view: one node per edge, unary links dashed."""
    lines = ["digraph forest {", "  node [shape=box];"]
    for e in chart.edges:
        label = f"{cat_text(e.cat)} [{e.begin},{e.end}]"
        if isinstance(e.sref, Lex):
            word = chart.grammar.lexicon[e.sref.entry].word
            label += f"\\n{word}"
        lines.append(f'  e{e.id} [label="{label}"];')
    for e in chart.edges:
        if isinstance(e.sref, Binary):
            lines.append(f"  e{e.id} -> e{e.sref.left};")
            lines.append(f"  e{e.id} -> e{e.sref.right};")
        elif isinstance(e.sref, Unary):
            lines.append(f"  e{e.id} -> e{e.sref.source} [style=dashed];")
    lines.append("}")
    return "\n".join(lines)


def _sref_json(sref):
    if isinstance(sref, Lex):
        return {"kind": "lex", "entry": sref.entry}
    if isinstance(sref, Binary):
        return {"kind": "binary", "left": sref.left, "right": sref.right,
                "rule": sref.rule}
    if isinstance(sref, Unary):
        return {"kind": "unary", "source": sref.source,
                "transformation": sref.transformation}
    raise RenderError(f"unknown edge reference {sref!r}")


def edges_json(chart: Chart) -> str:
    """JSON edge list mirroring (begin, end, cat, sref) records."""
    out = [{"id": e.id, "begin": e.begin, "end": e.end,
            "cat": cat_text(e.cat), "sref": _sref_json(e.sref)}
           for e in chart.edges]
    return json.dumps(out, indent=2)
