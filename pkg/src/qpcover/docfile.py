"""Line-based text format for quivers, potentials, seeds and covers.

```
[quiver NAME]
vertex ID (frozen|unfrozen)
arrow ID SRC -> TGT
[potential NAME on QUIVER]
term COEFF : A1 A2 ... Ak        # arrows in traversal order
[cover NAME : TOTAL -> BASE]
vmap V -> VBAR
amap A -> ABAR
deck order D vgen (CYCLES) agen (CYCLES)
sheets V:S ...
[seed NAME on QUIVER]
d V RATIONAL
```
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .covering import QuiverCovering, SheetLabeling
from .errors import ParseError, QPError
from .quiver import Potential, Quiver
from .seeds import Seed, seed_from_quiver

_HEADER = re.compile(r"^\[(quiver|potential|cover|seed)\s+(.*)\]$")


@dataclass
class _Block:
    kind: str
    name: str
    line: int
    args: dict
    body: list = field(default_factory=list)


@dataclass
class Document:
    quivers: dict = field(default_factory=dict)
    potentials: dict = field(default_factory=dict)
    covers: dict = field(default_factory=dict)
    sheets: dict = field(default_factory=dict)
    seeds: dict = field(default_factory=dict)
    potential_quiver: dict = field(default_factory=dict)
    seed_quiver: dict = field(default_factory=dict)
    seed_d: dict = field(default_factory=dict)

    def __eq__(self, other):
        if not isinstance(other, Document):
            return NotImplemented
        if self.quivers != other.quivers or self.seeds != other.seeds:
            return False
        if set(self.potentials) != set(other.potentials):
            return False
        if any(not self.potentials[k].equivalent(other.potentials[k]) for k in self.potentials):
            return False
        if set(self.covers) != set(other.covers):
            return False
        for k, c in self.covers.items():
            o = other.covers[k]
            if (c.total, c.base, c.vmap, c.amap, c.deck_order) != (o.total, o.base, o.vmap, o.amap, o.deck_order):
                return False
        return ({k: s.sheets for k, s in self.sheets.items()}
                == {k: s.sheets for k, s in other.sheets.items()})

    def is_empty(self):
        return not (self.quivers or self.potentials or self.covers or self.seeds)


def _strip(line):
    i = line.find("#")
    return (line if i < 0 else line[:i]).strip()


def _rational(tok, lineno, col):
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"bad rational {tok!r}", lineno, col) from None


def _cycles(text, lineno):
    """'(1 3)(2 4)' -> {1: 3, 3: 1, 2: 4, 4: 2}."""
    perm = {}
    text = text.strip()
    if not re.fullmatch(r"(\([^()]*\)\s*)*", text):
        raise ParseError(f"bad cycle notation {text!r}", lineno)
    for grp in re.findall(r"\(([^()]*)\)", text):
        items = grp.split()
        for x, y in zip(items, items[1:] + items[:1]):
            if x in perm:
                raise ParseError(f"{x} appears twice in cycles", lineno)
            perm[x] = y
    return perm


def _split_blocks(text):
    blocks = []
    names = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip(raw)
        if not line:
            continue
        m = _HEADER.match(line)
        if m:
            kind, rest = m.groups()
            if kind == "quiver":
                name, args = rest.strip(), {}
            elif kind in ("potential", "seed"):
                mm = re.fullmatch(r"(\S+)\s+on\s+(\S+)", rest.strip())
                if not mm:
                    raise ParseError(f"expected '[{kind} NAME on QUIVER]'", lineno)
                name, args = mm.group(1), {"on": mm.group(2)}
            else:
                mm = re.fullmatch(r"(\S+)\s*:\s*(\S+)\s*->\s*(\S+)", rest.strip())
                if not mm:
                    raise ParseError("expected '[cover NAME : TOTAL -> BASE]'", lineno)
                name, args = mm.group(1), {"total": mm.group(2), "base": mm.group(3)}
            if not name or " " in name:
                raise ParseError(f"bad name {name!r}", lineno)
            if (kind, name) in names:
                raise ParseError(f"duplicate {kind} {name!r}", lineno)
            names.add((kind, name))
            blocks.append(_Block(kind, name, lineno, args))
            continue
        if not blocks:
            raise ParseError("statement outside of a section", lineno, 1)
        col = len(raw) - len(raw.lstrip()) + 1
        blocks[-1].body.append((lineno, col, line))
    return blocks


def parse_document(text: str) -> Document:
    doc = Document()
    for b in _split_blocks(text):
        try:
            _parse_block(doc, b)
        except ParseError:
            raise
        except QPError as e:
            raise ParseError(str(e), b.line) from e
    return doc


def _resolve(table, name, what, lineno):
    if name not in table:
        raise ParseError(f"unknown {what} {name!r}", lineno)
    return table[name]


def _parse_block(doc: Document, b: _Block):
    if b.kind == "quiver":
        verts, arrows, declared = [], [], set()
        for lineno, col, line in b.body:
            toks = line.split()
            if toks[0] == "vertex":
                if len(toks) not in (2, 3) or (len(toks) == 3 and toks[2] not in ("frozen", "unfrozen")):
                    raise ParseError("expected 'vertex ID (frozen|unfrozen)'", lineno, col)
                if toks[1] in declared:
                    raise ParseError(f"duplicate vertex {toks[1]!r}", lineno, col)
                declared.add(toks[1])
                verts.append((toks[1], len(toks) == 3 and toks[2] == "frozen"))
            elif toks[0] == "arrow":
                if len(toks) != 5 or toks[3] != "->":
                    raise ParseError("expected 'arrow ID SRC -> TGT'", lineno, col)
                for end, c in ((toks[2], line.find(toks[2])), (toks[4], line.rfind(toks[4]))):
                    if end not in declared:
                        raise ParseError(f"arrow {toks[1]} uses undeclared vertex {end!r}", lineno, col + c)
                if any(a == toks[1] for a, _, _ in arrows):
                    raise ParseError(f"duplicate arrow {toks[1]!r}", lineno, col)
                arrows.append((toks[1], toks[2], toks[4]))
            else:
                raise ParseError(f"unknown statement {toks[0]!r}", lineno, col)
        doc.quivers[b.name] = Quiver(verts, arrows, name=b.name)
    elif b.kind == "potential":
        q = _resolve(doc.quivers, b.args["on"], "quiver", b.line)
        terms = []
        for lineno, col, line in b.body:
            m = re.fullmatch(r"term\s+(\S+)\s*:\s*(.*)", line)
            if not m:
                raise ParseError("expected 'term COEFF : A1 ... Ak'", lineno, col)
            coef = _rational(m.group(1), lineno, col + 5)
            arrows = m.group(2).split()
            for a in arrows:
                if a not in q.arrows:
                    raise ParseError(f"unknown arrow {a!r}", lineno, col + line.find(a))
            try:
                terms.append((coef, q.path(arrows)))
            except QPError as e:
                raise ParseError(str(e), lineno, col) from e
        doc.potentials[b.name] = Potential(q, terms)
        doc.potential_quiver[b.name] = b.args["on"]
    elif b.kind == "seed":
        q = _resolve(doc.quivers, b.args["on"], "quiver", b.line)
        d = {}
        for lineno, col, line in b.body:
            toks = line.split()
            if toks[0] != "d" or len(toks) != 3:
                raise ParseError("expected 'd V RATIONAL'", lineno, col)
            if toks[1] not in q.vertices:
                raise ParseError(f"unknown vertex {toks[1]!r}", lineno, col + 2)
            d[toks[1]] = _rational(toks[2], lineno, col)
        base = seed_from_quiver(q)
        doc.seeds[b.name] = Seed(base.indices, base.matrix(), d=d, frozen=base.frozen)
        doc.seed_quiver[b.name] = b.args["on"]
        doc.seed_d[b.name] = d
    else:
        total = _resolve(doc.quivers, b.args["total"], "quiver", b.line)
        base = _resolve(doc.quivers, b.args["base"], "quiver", b.line)
        vmap, amap, gens, order, sheets = {}, {}, [], None, None
        for lineno, col, line in b.body:
            toks = line.split()
            if toks[0] in ("vmap", "amap"):
                if len(toks) != 4 or toks[2] != "->":
                    raise ParseError(f"expected '{toks[0]} X -> XBAR'", lineno, col)
                table, src, dst = (vmap, total.vertices, base.vertices) if toks[0] == "vmap" else (
                    amap, total.arrows, base.arrows)
                if toks[1] not in src:
                    raise ParseError(f"unknown total id {toks[1]!r}", lineno, col)
                if toks[3] not in dst:
                    raise ParseError(f"unknown base id {toks[3]!r}", lineno, col)
                if toks[1] in table:
                    raise ParseError(f"duplicate map entry for {toks[1]!r}", lineno, col)
                table[toks[1]] = toks[3]
            elif toks[0] == "deck":
                m = re.fullmatch(r"deck\s+order\s+(\d+)\s+vgen\s+(.*?)\s+agen\s+(.*)", line)
                if not m:
                    raise ParseError("expected 'deck order D vgen (CYCLES) agen (CYCLES)'", lineno, col)
                o = int(m.group(1))
                if order is not None and o != order:
                    raise ParseError("conflicting deck orders", lineno, col)
                order = o
                gv, ga = _cycles(m.group(2), lineno), _cycles(m.group(3), lineno)
                for x in gv:
                    if x not in total.vertices:
                        raise ParseError(f"unknown vertex {x!r} in deck generator", lineno, col)
                for x in ga:
                    if x not in total.arrows:
                        raise ParseError(f"unknown arrow {x!r} in deck generator", lineno, col)
                gv = {v: gv.get(v, v) for v in total.vertices}
                ga = {a: ga.get(a, a) for a in total.arrows}
                gens.append((gv, ga))
            elif toks[0] == "sheets":
                sheets = {}
                for tok in toks[1:]:
                    v, _, s = tok.rpartition(":")
                    if v not in total.vertices or not s.lstrip("-").isdigit():
                        raise ParseError(f"bad sheet entry {tok!r}", lineno, col)
                    sheets[v] = int(s)
            else:
                raise ParseError(f"unknown statement {toks[0]!r}", lineno, col)
        if order is None:
            order = 1
        c = QuiverCovering(total, base, vmap, amap, order, gens, name=b.name)
        doc.covers[b.name] = c
        if sheets is not None:
            gen = gens[0] if len(gens) == 1 else None
            doc.sheets[b.name] = SheetLabeling(c, sheets, gen)


def _fmt(x):
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _perm_cycles(perm, order):
    seen, out = set(), []
    for x in order:
        if x in seen or perm.get(x, x) == x:
            seen.add(x)
            continue
        cyc, y = [], x
        while y not in seen:
            seen.add(y)
            cyc.append(y)
            y = perm[y]
        out.append("(" + " ".join(cyc) + ")")
    return "".join(out) or "()"


def serialize_document(doc: Document) -> str:
    lines = []
    for name, q in doc.quivers.items():
        lines.append(f"[quiver {name}]")
        for v in q.vertices:
            lines.append(f"vertex {v} {'frozen' if v in q.frozen else 'unfrozen'}")
        for a, (s, t) in q.arrows.items():
            lines.append(f"arrow {a} {s} -> {t}")
        lines.append("")
    for name, w in doc.potentials.items():
        qname = doc.potential_quiver.get(name) or _name_of(doc, w.quiver)
        lines.append(f"[potential {name} on {qname}]")
        for c, p in w.terms:
            lines.append(f"term {_fmt(c)} : {' '.join(p.arrows)}")
        lines.append("")
    for name, sd in doc.seeds.items():
        qname = doc.seed_quiver[name]
        lines.append(f"[seed {name} on {qname}]")
        for v, x in doc.seed_d.get(name, {}).items():
            lines.append(f"d {v} {_fmt(x)}")
        lines.append("")
    for name, c in doc.covers.items():
        lines.append(f"[cover {name} : {_name_of(doc, c.total)} -> {_name_of(doc, c.base)}]")
        for v in c.total.vertices:
            lines.append(f"vmap {v} -> {c.vmap[v]}")
        for a in c.total.arrows:
            lines.append(f"amap {a} -> {c.amap[a]}")
        for gv, ga in c.generators:
            lines.append(f"deck order {c.deck_order} vgen {_perm_cycles(gv, c.total.vertices)} "
                         f"agen {_perm_cycles(ga, list(c.total.arrows))}")
        if name in doc.sheets:
            sl = doc.sheets[name]
            lines.append("sheets " + " ".join(f"{v}:{sl.sheets[v]}" for v in c.total.vertices))
        lines.append("")
    return "\n".join(lines)


def _name_of(doc, q):
    for n, x in doc.quivers.items():
        if x is q or x == q:
            return n
    raise QPError("quiver is not registered in the document")


def load_document(path) -> Document:
    with open(path, encoding="utf-8") as fh:
        return parse_document(fh.read())
