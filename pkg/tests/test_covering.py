from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qpcover.covering import (QuiverCovering, check_sigma_injectivity, compose_coverings,
                              compute_sheet_labeling, cyclic_cover, identity_covering,
                              pullback_module, sigma_pk_isomorphism)
from qpcover.errors import PreconditionError, ValidationError
from qpcover.jacobian import build_truncated_jacobian, stabilization_order
from qpcover.quiver import Element, cyclic_derivative

ALL = ["kronecker-cover2", "liegrass-cover2", "loopwrap", "torus1p-cover3"]


def base_paths(c, max_len=3):
    return [p for p in c.base.enumerate_paths(max_len=max_len) if p.arrows]


@pytest.mark.parametrize("name", ALL)
def test_fixture_covers_validate(covers, name):
    c = covers[name].covering
    assert c.validate().ok
    assert len(c.deck_elements()) == c.d
    for vb in c.base.vertices:
        assert len(c.fiber(vb)) == c.d


@pytest.mark.parametrize("name", ALL)
def test_lifts_are_unique_and_project_back(covers, name):
    c = covers[name].covering
    for p in base_paths(c):
        lifts = c.lifts(p)
        assert len(lifts) == c.d
        assert len(set(lifts)) == c.d
        for lp in lifts:
            assert c.project_path(lp) == p
            assert c.lift_path(p, end=lp.target) == lp


@pytest.mark.parametrize("name", ALL)
def test_sigma_is_orbit_sum(covers, name):
    c = covers[name].covering
    group = c.deck_elements()
    for p in base_paths(c):
        lp = c.lift_path(p, start=c.fiber(p.source)[0])
        orbit = Element(c.total, {c.act_path(g, lp): 1 for g in group})
        assert c.sigma(Element.of(c.base, p)) == orbit


@pytest.mark.parametrize("name", ["kronecker-cover2", "liegrass-cover2", "torus1p-cover3"])
def test_sigma_multiplicative(covers, name):
    c = covers[name].covering
    paths = base_paths(c, 2)
    for p in paths:
        for q in paths:
            x, y = Element.of(c.base, p), Element.of(c.base, q)
            assert c.sigma(x * y) == c.sigma(x) * c.sigma(y)


@pytest.mark.parametrize("name", ALL)
def test_pi_sigma_scales_by_degree(covers, name):
    c = covers[name].covering
    for p in base_paths(c, 2):
        x = Element.of(c.base, p, 3)
        assert c.pi(c.sigma(x)) == c.d * x


@pytest.mark.parametrize("name", ALL)
def test_cyclic_derivative_exchange(covers, name):
    """The derivative of the lifted potential along a is the part of the lifted derivative starting at t(a)."""
    f = covers[name]
    c = f.covering
    for a in c.total.arrows:
        lhs = cyclic_derivative(a, f.potential)
        lifted = c.sigma(cyclic_derivative(c.amap[a], f.base_potential))
        rhs = Element(c.total, {p: x for p, x in lifted.terms.items() if p.source == c.total.target(a)})
        assert lhs == rhs


@pytest.mark.parametrize("name", ALL)
def test_sigma_injective_and_projectives_pull_back(covers, name):
    f = covers[name]
    c = f.covering
    l = stabilization_order(c.base, f.base_potential, 8) or 3
    base_alg = build_truncated_jacobian(c.base, f.base_potential, l)
    alg = build_truncated_jacobian(c.total, f.potential, l)
    assert base_alg.dim() * c.d == alg.dim()
    assert check_sigma_injectivity(c, base_alg, alg) == (True, None)
    for k in c.total.vertices:
        ok, reason = sigma_pk_isomorphism(c, base_alg.projective(c.vmap[k]), alg.projective(k))
        assert ok, reason


def test_pullback_dimension_vector(kron):
    c = kron.covering
    alg = build_truncated_jacobian(c.total, kron.potential, 2)
    base_alg = build_truncated_jacobian(c.base, kron.base_potential, 2)
    pb = pullback_module(c, alg.projective("2"), alg, base_alg)
    assert pb.dim_vector() == {"1bar": 2, "2bar": 1}
    assert pb.cover_vertex_of.count("1") == 1 and pb.cover_vertex_of.count("3") == 1


def test_lift_needs_one_endpoint(kron):
    c = kron.covering
    p = c.base.path(["abar"])
    with pytest.raises(PreconditionError):
        c.lift_path(p)
    with pytest.raises(PreconditionError):
        c.lift_path(p, start="1")


def test_broken_covering_reports_local_failure(kron):
    c = kron.covering
    amap = dict(c.amap)
    amap["b2"] = "abar"
    bad = QuiverCovering(c.total, c.base, c.vmap, amap, 2, c.generators)
    rep = bad.validate()
    assert not rep.ok
    with pytest.raises(ValidationError):
        bad.check()


def test_deck_extension(kron):
    c = kron.covering
    vm, am = c.extend_deck("1", "3")
    assert vm == {"1": "3", "2": "4", "3": "1", "4": "2"}
    assert am["a1"] == "a2"
    assert c.extend_deck("1", "2") is None


def test_sheet_labeling_recovers_file_sheets(kron):
    s = compute_sheet_labeling(kron.covering)
    assert s.shifts == kron.sheets.shifts
    assert kron.sheets.shifts == {"abar": 0, "bbar": 1}


def test_composition_of_coverings(covers):
    f = covers["liegrass-cover2"]
    ident = identity_covering(f.covering.base)
    comp = compose_coverings(f.covering, ident)
    assert comp.d == 2 and comp.validate().ok


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 4), st.lists(st.integers(0, 3), min_size=3, max_size=3))
def test_cyclic_covers_of_triangle(d, shifts):
    from qpcover.quiver import Quiver
    base = Quiver(["1", "2", "3"], [("a", "1", "2"), ("b", "2", "3"), ("c", "3", "1")])
    sh = dict(zip("abc", shifts))
    c, sheets = cyclic_cover(base, d, sh)
    assert c.validate().ok
    assert sheets.shifts == {k: v % d for k, v in sh.items()}
    # lifts of the 3-cycle close up exactly when the total shift vanishes mod d
    cyc = base.path(["a", "b", "c"])
    closed = all(lp.source == lp.target for lp in c.lifts(cyc))
    assert closed == (sum(shifts) % d == 0)
