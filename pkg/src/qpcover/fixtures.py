"""Named quivers with potential and named coverings used throughout the tests and the CLI."""
from __future__ import annotations

import re

from dataclasses import dataclass
from importlib import resources

from .covering import QuiverCovering, SheetLabeling, cyclic_cover
from .docfile import Document, parse_document, serialize_document
from .errors import QPError
from .quiver import Potential, Quiver
from .surface import SurfaceCoverSpec, cyclic_surface_cover, once_punctured_torus, surface_potential


@dataclass
class QPFixture:
    name: str
    quiver: Quiver
    potential: Potential


@dataclass
class CoverFixture:
    name: str
    covering: QuiverCovering
    sheets: SheetLabeling | None
    base_potential: Potential
    potential: Potential
    document: Document | None = None


def _read(fname):
    return parse_document(resources.files("qpcover.data").joinpath(fname).read_text(encoding="utf-8"))


def kronecker() -> QPFixture:
    q = Quiver(["1bar", "2bar"], [("abar", "2bar", "1bar"), ("bbar", "2bar", "1bar")], name="kronecker")
    return QPFixture("kronecker", q, Potential.zero(q))


def a1() -> QPFixture:
    q = Quiver(["1"], name="a1")
    return QPFixture("a1", q, Potential.zero(q))


def a2() -> QPFixture:
    q = Quiver(["1", "2"], [("a", "2", "1")], name="a2")
    return QPFixture("a2", q, Potential.zero(q))


def a1xa1() -> QPFixture:
    q = Quiver(["1", "2"], name="a1xa1")
    return QPFixture("a1xa1", q, Potential.zero(q))


def markov() -> QPFixture:
    t = once_punctured_torus()
    return QPFixture("markov", t.quiver, surface_potential(t))


def liegrass_base():
    q = Quiver(["A", "B", "C", "D"],
               [("a1", "A", "B"), ("a2", "A", "B"), ("b1", "B", "C"), ("b2", "B", "C"), ("c", "C", "A"),
                ("c1", "C", "D"), ("c2", "C", "D"), ("d", "D", "B")], name="liegrass")
    w = Potential(q, [(1, ("a1", "b1", "c")), (1, ("a2", "b2", "c")),
                      (1, ("b1", "c1", "d")), (1, ("b2", "c2", "d"))])
    return q, w


def _cover_doc(c, sheets, wbar, w):
    doc = Document()
    doc.quivers[c.base.name] = c.base
    doc.quivers[c.total.name] = c.total
    if len(wbar):
        doc.potentials[f"{c.base.name}-w"] = wbar
        doc.potential_quiver[f"{c.base.name}-w"] = c.base.name
        doc.potentials[f"{c.total.name}-w"] = w
        doc.potential_quiver[f"{c.total.name}-w"] = c.total.name
    doc.covers[c.name] = c
    if sheets is not None:
        doc.sheets[c.name] = sheets
    return doc


def build_liegrass_cover(d=2):
    """Lifts of a2 and c2 climb one sheet, lifts of b2 descend one sheet."""
    base, wbar = liegrass_base()
    c, sl = cyclic_cover(base, d, {"a2": 1, "b2": d - 1, "c2": 1}, name=f"liegrass-cover{d}")
    c.total.name = f"liegrass{d}"
    return c, sl, wbar


def build_loopwrap_cover():
    """One vertex with a loop; the cube of the loop lifts to a cycle winding once around a 3:1 cover."""
    base = Quiver(["v"], [("l", "v", "v")], name="loop")
    wbar = Potential(base, [(1, ("l", "l", "l"))])
    c, sl = cyclic_cover(base, 3, {"l": 1}, name="loopwrap")
    c.total.name = "loop3"
    return c, sl, wbar


def build_torus_cover(d=3):
    t = once_punctured_torus()
    total, c, sl = cyclic_surface_cover(SurfaceCoverSpec(t, d, "b"), name=f"torus1p-cover{d}")
    c.total.name = f"torus1p{d}"
    c.base.name = "torus1p"
    return c, sl, surface_potential(t)


def generated_cover_text(name) -> str:
    """Serialized form of a programmatically built cover, as shipped in the data directory."""
    c, sl, wbar = _BUILDERS[name]()
    return serialize_document(_cover_doc(c, sl, wbar, c.sigma_potential(wbar)))


_BUILDERS = {
    "liegrass-cover2": build_liegrass_cover,
    "loopwrap": build_loopwrap_cover,
    "torus1p-cover3": build_torus_cover,
}

COVER_FILES = {
    "kronecker-cover2": "kronecker-cover2.qp",
    "liegrass-cover2": "liegrass-cover2.qp",
    "loopwrap": "loopwrap.qp",
    "torus1p-cover3": "torus1p-cover3.qp",
}

ALIASES = {"loopwrap-fixture": "loopwrap", "torus1p": "markov", "a2-fixture": "a2", "liegrass-base": "liegrass"}

# cyclic families built on demand for sheet counts without a shipped file
_FAMILIES = {"liegrass-cover": build_liegrass_cover, "torus1p-cover": build_torus_cover}
_FAMILY_NAME = re.compile(r"^(liegrass-cover|torus1p-cover)(\d+)$")

QP_FIXTURES = {"a1": a1, "a2": a2, "a1xa1": a1xa1, "kronecker": kronecker, "markov": markov,
               "liegrass": lambda: QPFixture("liegrass", *liegrass_base())}


def cover_from_document(doc: Document, name: str) -> CoverFixture:
    if name not in doc.covers:
        raise QPError(f"no cover named {name!r}")
    c = doc.covers[name].check()
    wbar = Potential.zero(c.base)
    for pname, w in doc.potentials.items():
        if w.quiver == c.base:
            wbar = w
            break
    return CoverFixture(name, c, doc.sheets.get(name), wbar, c.sigma_potential(wbar), doc)


def load_cover(name: str) -> CoverFixture:
    name = ALIASES.get(name, name)
    m = _FAMILY_NAME.match(name)
    if name not in COVER_FILES and m:
        d = int(m.group(2))
        if d < 2:
            raise QPError(f"{name}: the sheet count must be at least 2")
        c, sl, wbar = _FAMILIES[m.group(1)](d)
        return cover_from_document(_cover_doc(c, sl, wbar, c.sigma_potential(wbar)), name)
    if name not in COVER_FILES:
        raise QPError(f"unknown cover fixture {name!r}; known: {', '.join(sorted(COVER_FILES))}")
    return cover_from_document(_read(COVER_FILES[name]), name)


def load_qp(name: str) -> QPFixture:
    name = ALIASES.get(name, name)
    if name in QP_FIXTURES:
        return QP_FIXTURES[name]()
    if name in COVER_FILES or _FAMILY_NAME.match(name):
        cf = load_cover(name)
        return QPFixture(name, cf.covering.total, cf.potential)
    raise QPError(f"unknown fixture {name!r}")


def fixture_names():
    return {"quivers": sorted(QP_FIXTURES), "covers": sorted(COVER_FILES),
            "families": [f"{k}<d>" for k in sorted(_FAMILIES)], "aliases": [f"{a}={b}" for a, b in sorted(ALIASES.items())]}
