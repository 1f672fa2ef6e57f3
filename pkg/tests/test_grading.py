import pytest
from hypothesis import given, settings, strategies as st

from qpcover.covering import identity_covering
from qpcover.errors import PreconditionError, ResourceError
from qpcover.fixtures import load_cover
from qpcover.grading import (WrapAssignment, build_extended_cyclic_cover, check_nice_grading,
                             check_non_wrapping, find_nice_grading, sheet_uniform_extensions)
from qpcover.jacobian import SupportData, build_truncated_jacobian, supports
from qpcover.quiver import Potential


@pytest.fixture(scope="module")
def kron_p2(kron):
    return build_truncated_jacobian(kron.covering.total, kron.potential, 2).projective("2")


@pytest.fixture(scope="module")
def torus_alg(torus):
    return build_truncated_jacobian(torus.covering.total, torus.potential, 6)


def test_kronecker_support(kron_p2):
    s = supports(kron_p2)
    assert s.vertices == {"1", "2", "3"}
    assert s.arrows == {"a1", "b1"}
    assert kron_p2.dim_tuple() == (1, 1, 1, 0)


def test_kronecker_grading_from_example(kron, kron_p2):
    ok, problems = check_nice_grading(kron.covering, kron_p2, {"2": 0, "1": 0, "3": 1})
    assert ok and not problems


def test_fiber_collision_detected(kron, kron_p2):
    ok, problems = check_nice_grading(kron.covering, kron_p2, {"2": 0, "1": 0, "3": 0})
    assert not ok
    assert problems[0][0] == "fiber"


def test_missing_vertex_is_precondition_error(kron, kron_p2):
    with pytest.raises(PreconditionError):
        check_nice_grading(kron.covering, kron_p2, {"2": 0})


def test_search_finds_kronecker_grading(kron, kron_p2):
    g = find_nice_grading(kron.covering, kron_p2, 1, kron.sheets)
    assert g is not None
    base = g.vertex_degrees["2"]
    assert {v: x - base for v, x in g.vertex_degrees.items()} == {"2": 0, "1": 0, "3": 1}


def test_no_global_extension(kron):
    """Fixing the degrees on the support of P_2 leaves no consistent value at vertex 4."""
    c = kron.covering
    whole = SupportData(c.total.vertices, c.total.arrows)
    attempts = list(sheet_uniform_extensions(c, {"2": 0, "1": 0, "3": 1}, 1))
    assert len(attempts) == 5
    assert all(not check_nice_grading(c, None, g, whole)[0] for g in attempts)


def test_trivial_cover_accepts_constant_grading():
    f = load_cover("kronecker-cover2")
    c = identity_covering(f.covering.base)
    p = build_truncated_jacobian(c.total, None, 2).projective("2bar")
    assert check_nice_grading(c, p, {v: 7 for v in c.total.vertices})[0]
    assert find_nice_grading(c, p, 1) is not None


def test_bound_must_be_positive(kron, kron_p2):
    with pytest.raises(PreconditionError):
        find_nice_grading(kron.covering, kron_p2, 0)


def test_torus_sheet_grading(torus, torus_alg):
    p = torus_alg.projective("a^1")
    s = supports(p)
    assert s.vertices == set(torus.covering.total.vertices) - {"b^0"}
    assert len(s.arrows) == 12
    ok, _ = check_nice_grading(torus.covering, p, torus.sheets.sheets)
    assert ok


def test_every_torus_projective_has_a_grading(torus, torus_alg):
    c = torus.covering
    for k in c.total.vertices:
        p = torus_alg.projective(k)
        g = find_nice_grading(c, p, 1, torus.sheets)
        assert g is not None, k
        assert check_nice_grading(c, p, g.vertex_degrees)[0]
        shift = {(g.vertex_degrees[v] - torus.sheets.sheets[v]) % c.d for v in g.vertex_degrees}
        assert len(shift) == 1


@settings(max_examples=20, deadline=None)
@given(st.integers(-5, 5))
def test_shift_invariance(torus, torus_alg, shift):
    p = torus_alg.projective("a^1")
    g = {v: s + shift for v, s in torus.sheets.sheets.items()}
    assert check_nice_grading(torus.covering, p, g)[0]


def test_nonwrap_liegrass(covers):
    f = covers["liegrass-cover2"]
    wa = check_non_wrapping(f.covering, f.sheets, f.base_potential)
    assert wa is not None
    for _, cyc in f.base_potential.terms:
        assert sum(wa.degrees[a] for a in cyc.arrows) == 0


def test_nonwrap_torus(torus):
    wa = check_non_wrapping(torus.covering, torus.sheets, torus.base_potential)
    assert wa is not None
    for _, cyc in torus.base_potential.terms:
        assert sum(wa.degrees[a] for a in cyc.arrows) == 0
    for a, deg in wa.degrees.items():
        assert deg in (torus.sheets.shifts[a], torus.sheets.shifts[a] - 3)


def test_nonwrap_loop_fails(covers):
    f = covers["loopwrap"]
    assert check_non_wrapping(f.covering, f.sheets, f.base_potential) is None


def test_nonwrap_zero_potential(kron):
    wa = check_non_wrapping(kron.covering, kron.sheets, Potential.zero(kron.covering.base))
    assert wa.degrees == kron.sheets.shifts


def test_nonwrap_variable_cap(covers):
    f = covers["liegrass-cover2"]
    with pytest.raises(ResourceError):
        check_non_wrapping(f.covering, f.sheets, f.base_potential, max_vars=2)


def test_extended_cover(covers):
    f = covers["liegrass-cover2"]
    c = f.covering
    wa = check_non_wrapping(c, f.sheets, f.base_potential)
    ext = build_extended_cyclic_cover(c, f.sheets, wa, 2)
    E = ext.covering
    assert E.d == 8 and len(E.total.vertices) == 32
    assert E.validate().ok and ext.factor.validate().ok and ext.factor.d == 4
    # lifted potential terms close up, and the factor map followed by c is the extended cover
    E.sigma_potential(f.base_potential)
    for v in E.total.vertices:
        assert c.vmap[ext.factor.vmap[v]] == E.vmap[v]
    for a in E.total.arrows:
        assert c.amap[ext.factor.amap[a]] == E.amap[a]
        s, t = E.total.arrows[a]
        assert (ext.sheets[t] - ext.sheets[s]) % 8 == wa.degrees[E.amap[a]] % 8


def test_extended_cover_labels_give_nice_grading(covers):
    f = covers["liegrass-cover2"]
    c = f.covering
    wa = check_non_wrapping(c, f.sheets, f.base_potential)
    l = 2
    ext = build_extended_cyclic_cover(c, f.sheets, wa, l)
    E = ext.covering
    alg = build_truncated_jacobian(E.total, E.sigma_potential(f.base_potential), l)
    for vb in E.base.vertices:
        k = f"{vb}^{l * c.d}"
        ok, problems = check_nice_grading(E, alg.projective(k), ext.sheets)
        assert ok, problems


def test_extended_cover_needs_d_above_one(kron):
    from qpcover.covering import cyclic_cover
    c, sl = cyclic_cover(kron.covering.base, 1, {})
    with pytest.raises(PreconditionError):
        build_extended_cyclic_cover(c, sl, WrapAssignment({}, 1), 2)
