import pytest
from hypothesis import given, settings, strategies as st

from qpcover.docfile import load_document, parse_document, serialize_document
from qpcover.errors import ParseError
from qpcover.fixtures import fixture_names, generated_cover_text, load_cover
from qpcover.quiver import Potential, Quiver


def test_empty_document():
    doc = parse_document("")
    assert doc.is_empty()
    assert parse_document("# only a comment\n\n").is_empty()


@pytest.mark.parametrize("name", fixture_names()["covers"])
def test_fixture_round_trip(name):
    doc = load_cover(name).document
    text = serialize_document(doc)
    assert parse_document(text) == doc
    assert serialize_document(parse_document(text)) == text


@pytest.mark.parametrize("name", ["liegrass-cover2", "loopwrap", "torus1p-cover3"])
def test_shipped_files_match_generators(name):
    assert parse_document(generated_cover_text(name)) == load_cover(name).document


def test_undeclared_vertex_reports_line():
    text = "[quiver q]\nvertex 1 unfrozen\narrow a 1 -> 2\n"
    with pytest.raises(ParseError) as e:
        parse_document(text)
    assert e.value.line == 3


def test_dangling_potential_reference():
    text = "[quiver q]\nvertex 1 unfrozen\n[potential w on r]\n"
    with pytest.raises(ParseError) as e:
        parse_document(text)
    assert e.value.line == 3


def test_duplicate_block_rejected():
    text = "[quiver q]\nvertex 1 unfrozen\n[quiver q]\nvertex 2 unfrozen\n"
    with pytest.raises(ParseError):
        parse_document(text)


def test_bad_rational_rejected():
    text = ("[quiver q]\nvertex 1 unfrozen\narrow a 1 -> 1\narrow b 1 -> 1\narrow c 1 -> 1\n"
            "[potential w on q]\nterm 1/x : a b c\n")
    with pytest.raises(ParseError) as e:
        parse_document(text)
    assert e.value.line == 7


def test_load_document(tmp_path):
    p = tmp_path / "k.qp"
    p.write_text(generated_cover_text("loopwrap"))
    assert load_document(p) == load_cover("loopwrap").document


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4), st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)), max_size=6),
       st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=4).filter(bool), max_size=2))
def test_random_round_trip(nv, edges, coeffs):
    from qpcover.docfile import Document
    verts = [f"v{i}" for i in range(nv)]
    arrows = [(f"x{i}", verts[s % nv], verts[t % nv]) for i, (s, t) in enumerate(edges)]
    q = Quiver(verts, arrows, name="q")
    loops = [a for a, s, t in arrows if s == t]
    terms = [(c, (loops[0],) * 3) for c in coeffs] if loops else []
    doc = Document(quivers={"q": q}, potentials={"w": Potential(q, terms)}, potential_quiver={"w": "q"})
    back = parse_document(serialize_document(doc))
    assert back == doc
