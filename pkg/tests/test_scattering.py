from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from qpcover.covering import identity_covering
from qpcover.errors import PreconditionError
from qpcover.fixtures import load_qp
from qpcover.quiver import Potential
from qpcover.scattering import (CoverWall, TruncatedAutomorphism, TruncatedSeries, Wall2D,
                                compare_theta_covering, dilog_hamiltonian, evaluate_principal_at_one,
                                exp_action, initial_cluster_walls, initial_cover_walls, path_ordered_product,
                                pi_project_automorphism, rank2_complete, restrict_walls, same_walls,
                                theta_stability)
from qpcover.seeds import Seed, principal_seed, seed_covering, seed_from_quiver


def series(rank, order, d):
    return TruncatedSeries(rank, order, d)


@pytest.fixture(scope="module")
def kseed():
    return seed_from_quiver(load_qp("kronecker").quiver)


@pytest.fixture(scope="module")
def a2seed():
    return seed_from_quiver(load_qp("a2").quiver)


small_series = st.dictionaries(
    st.tuples(st.integers(0, 2), st.integers(0, 2)).filter(lambda n: sum(n) > 0),
    st.fractions(min_value=-3, max_value=3, max_denominator=3), max_size=4)


@settings(max_examples=40, deadline=None)
@given(small_series)
def test_series_exp_log_inverse(coeffs):
    h = series(2, 4, coeffs)
    e = h.exp()
    assert e.log() == h
    assert e * e.inverse() == TruncatedSeries.one(2, 4)
    assert e ** -2 == (e * e).inverse()


def test_series_rejects_bad_input():
    with pytest.raises(PreconditionError):
        series(1, 3, {(1,): 1}).inverse()
    with pytest.raises(PreconditionError):
        series(1, 3, {(0,): 1}).exp()


def test_zero_hamiltonian_is_identity(kseed):
    assert exp_action(kseed, TruncatedSeries(2, 4), 4).is_identity()


@pytest.mark.parametrize("k", [0, 1])
@pytest.mark.parametrize("d", [1, 3])
def test_dilog_closed_form(kseed, k, d):
    order = 6
    theta = exp_action(kseed, dilog_hamiltonian(2, k, d, order), order)
    y = sympy.Symbol("y")
    # S_k = (1 + y_k)^(d <e_k, f_k>) with d_k = 1; the other image is trivial
    poly = sympy.Poly(sympy.expand((1 + y) ** d), y)
    n = lambda j: tuple(j if i == k else 0 for i in range(2))
    want = series(2, order, {n(j): int(c) for (j,), c in poly.terms()})
    for i, idx in enumerate(kseed.unfrozen):
        assert theta.images[idx] == (want if i == k else TruncatedSeries.one(2, order))


def test_dilog_with_multiplicity():
    sd = Seed(["1"], [[0]])
    order = 5
    theta = exp_action(sd, dilog_hamiltonian(1, 0, 2, order), order)
    y = sympy.Symbol("y")
    poly = sympy.Poly(sympy.expand((1 + y) ** 2), y)
    assert theta.images["1"] == series(1, order, {(j,): int(c) for (j,), c in poly.terms()})


def test_a1_principal_single_term():
    pr = principal_seed(Seed(["1"], [[0]]))
    h = series(1, 1, {(1,): 1})
    theta = exp_action(pr, h, 1)
    assert theta.images["1"] == series(1, 1, {(0,): 1, (1,): 1})
    assert theta.images["1'"] == TruncatedSeries.one(1, 1)
    assert theta.as_laurent("1") == {(0, 0): 1, (0, 1): 1}
    assert exp_action(pr, series(1, 3, {(1,): 1}), 3).images["1"] == series(1, 3, {(1,): 1}).exp()


@settings(max_examples=15, deadline=None)
@given(small_series, small_series)
def test_group_laws(kseed, c1, c2):
    order = 4
    a = exp_action(kseed, series(2, order, c1), order)
    b = exp_action(kseed, series(2, order, c2), order)
    ident = TruncatedAutomorphism.identity(kseed, order)
    assert a.compose(a.inverse()) == ident
    assert a.inverse().compose(a) == ident
    assert a.compose(ident) == a
    assert a.compose(b).compose(a).images == a.compose(b.compose(a)).images
    assert exp_action(kseed, series(2, order, c1), order, sign=-1) == a.inverse()


def test_a1_stability_operator():
    f = load_qp("a1")
    theta = theta_stability(f.quiver, f.potential, None, 4)
    assert theta.images["1"] == series(1, 4, {(0,): 1, (1,): 1})


def test_order_zero_is_identity():
    f = load_qp("kronecker")
    assert theta_stability(f.quiver, f.potential, None, 0).is_identity()


def test_kronecker_stability_matches_oracle():
    f = load_qp("kronecker")
    loc = theta_stability(f.quiver, f.potential, None, 3, method="loc")
    ff = theta_stability(f.quiver, f.potential, None, 3, method="ff")
    assert loc == ff


def test_kronecker_convention(kseed):
    f = load_qp("kronecker")
    theta = theta_stability(f.quiver, f.potential, kseed, 3, opposite=True)
    assert theta.images["1bar"] == series(2, 3, {(0, 0): 1, (1, 0): 1, (1, 1): 2, (1, 2): 1})
    assert theta.images["2bar"] == series(2, 3, {(0, 0): 1, (0, 1): 1})


@pytest.mark.parametrize("name", ["a1", "kronecker"])
def test_principal_at_one(name):
    f = load_qp(name)
    sd = seed_from_quiver(f.quiver)
    pr = theta_stability(f.quiver, f.potential, sd, 3, principal=True)
    plain = theta_stability(f.quiver, f.potential, sd, 3)
    assert evaluate_principal_at_one(pr, sd) == plain


def test_projection_of_symmetric_hamiltonian(kron):
    c = kron.covering
    sd = seed_from_quiver(c.total)
    sc = seed_covering(sd, {i: c.vmap[i] for i in sd.indices})
    order = 2
    idx = list(sd.unfrozen)
    e = lambda *vs: tuple(1 if i in vs else 0 for i in idx)
    h = series(4, order, {e("1"): 1, e("3"): 1, e("1", "2"): Fraction(1, 2), e("3", "4"): Fraction(1, 2),
                          e("2"): -1, e("4"): -1})
    proj = pi_project_automorphism(sc, exp_action(sd, h, order))
    hbar = series(2, order, {(1, 0): 2, (1, 1): 1, (0, 1): -2})
    assert proj == exp_action(sc.base, hbar, order)


def test_projection_of_identity(kron):
    c = kron.covering
    sd = seed_from_quiver(c.total)
    sc = seed_covering(sd, {i: c.vmap[i] for i in sd.indices})
    assert pi_project_automorphism(sc, TruncatedAutomorphism.identity(sd, 3)).is_identity()


def test_compare_kronecker_cover(kron):
    cmp = compare_theta_covering(kron.covering, kron.base_potential, kron.potential, 3)
    assert cmp.equivalent


def test_compare_trivial_cover():
    f = load_qp("a2")
    c = identity_covering(f.quiver)
    assert compare_theta_covering(c, f.potential, f.potential, 3).equivalent


def test_crossing_twice_cancels(kseed):
    w = initial_cluster_walls(kseed, 4)[0]
    assert path_ordered_product(kseed, [(w, 1), (w, -1)], 4).is_identity()
    assert path_ordered_product(kseed, [], 4).is_identity()


def test_a1xa1_adds_nothing():
    sd = seed_from_quiver(load_qp("a1xa1").quiver)
    diag = rank2_complete(sd, initial_cluster_walls(sd, 5), 5)
    assert len(diag.nontrivial()) == 2
    assert diag.loop_product().is_identity()


def test_a2_completion(a2seed):
    for order in (2, 4, 6):
        diag = rank2_complete(a2seed, initial_cluster_walls(a2seed, order), order)
        new = [w for w in diag.nontrivial() if not w.initial]
        assert len(diag.nontrivial()) == 3 and len(new) == 1
        assert new[0].n0 == (1, 1)
        f = new[0].function(order)
        assert f[:2] == [1, 1] and not any(f[2:])
        assert diag.loop_product().is_identity()


@pytest.mark.parametrize("name", ["a2", "kronecker"])
def test_half_loop_is_stability_operator(name):
    f = load_qp(name)
    sd = seed_from_quiver(f.quiver)
    order = 4
    diag = rank2_complete(sd, initial_cluster_walls(sd, order), order)
    theta = theta_stability(f.quiver, f.potential, sd, order, opposite=True)
    assert diag.theta_plus_minus() == theta


def test_kronecker_order_coherence(kseed):
    d5 = rank2_complete(kseed, initial_cluster_walls(kseed, 5), 5)
    d6 = rank2_complete(kseed, initial_cluster_walls(kseed, 6), 6)
    assert d6.loop_product().is_identity()
    assert d6.truncate(5).signature() == d5.signature()


def test_rank2_needs_two_indices():
    with pytest.raises(PreconditionError):
        rank2_complete(Seed(["1"], [[0]]), [], 3)


def test_wall_normal_must_be_primitive():
    from qpcover.errors import ValidationError
    with pytest.raises(ValidationError):
        Wall2D((2, 2), "line", None, {1: 1})


def test_restrict_initial_walls(kron):
    c = kron.covering
    sd = seed_from_quiver(c.total)
    sc = seed_covering(sd, {i: c.vmap[i] for i in sd.indices})
    assert sc.base.d == {"1bar": 2, "2bar": 2}
    for order in range(1, 7):
        got = restrict_walls(sc, initial_cover_walls(sd, order), order)
        assert same_walls(got, initial_cluster_walls(sc.base, order), order)


def test_restrict_drops_walls_missing_the_image(kron):
    c = kron.covering
    sd = seed_from_quiver(c.total)
    sc = seed_covering(sd, {i: c.vmap[i] for i in sd.indices})
    # the cone spanned by f_1 - f_3 meets the deck-invariant subspace only at the origin
    wall = CoverWall((1, 0, 0, 0), {1: 1}, cone=[[1, 0, -1, 0]])
    assert restrict_walls(sc, [wall], 3) == []
    assert restrict_walls(sc, [], 3) == []
