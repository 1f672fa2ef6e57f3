from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from qpcover.errors import ValidationError
from qpcover.fixtures import kronecker, load_cover
from qpcover.quiver import Quiver
from qpcover.seeds import (Seed, dimension_vectors, matrix_rank, principal_seed, seed_covering,
                           seed_from_quiver)


def test_kronecker_exchange_matrix():
    sd = seed_from_quiver(kronecker().quiver)
    assert sd.matrix() == [[0, -2], [2, 0]]
    # p*(e_2bar) = sum_i B_i,2bar f_i
    assert sd.p_star({"2bar": 1}) == {"1bar": -2, "2bar": 0}


def test_loops_and_two_cycles_rejected():
    with pytest.raises(ValidationError):
        seed_from_quiver(Quiver(["1"], [("l", "1", "1")]))
    with pytest.raises(ValidationError):
        seed_from_quiver(Quiver(["1", "2"], [("a", "1", "2"), ("b", "2", "1")]))


def test_skew_symmetrizable_check():
    with pytest.raises(ValidationError):
        Seed(["1", "2"], [[0, 1], [1, 0]])
    Seed(["1", "2"], [[0, -1], [2, 0]], d={"1": 1, "2": 2})


def test_principal_seed_makes_p_star_injective():
    sd = Seed(["1", "2"], [[0, 0], [0, 0]])
    assert sd.p_star_rank() == 0
    pr = principal_seed(sd)
    assert pr.p_star_rank() == 2
    assert pr.b("1'", "1") == 1 and pr.b("1", "1'") == -1
    assert pr.frozen == {"1'", "2'"}


def test_principal_seed_respects_d():
    sd = Seed(["1", "2"], [[0, -1], [2, 0]], d={"1": 1, "2": 2})
    pr = principal_seed(sd)
    assert pr.b("2", "2'") == -2
    assert pr.bracket("2", "2'") == 1


def test_kronecker_seed_folds_with_d_two():
    c = load_cover("kronecker-cover2").covering
    sd = seed_from_quiver(c.total)
    sc = seed_covering(sd, {i: c.vmap[i] for i in sd.indices})
    assert sc.base.matrix() == [[0, -2], [2, 0]]
    assert sc.base.d == {"1bar": 2, "2bar": 2}


def test_kappa_pairing_identity():
    c = load_cover("kronecker-cover2").covering
    sd = seed_from_quiver(c.total)
    sc = seed_covering(sd, {i: c.vmap[i] for i in sd.indices})
    mbar = {"1bar": Fraction(3), "2bar": Fraction(-5)}
    for k in sd.unfrozen:
        n0 = {k: 1}
        lhs = sd.pairing(n0, sc.kappa(mbar))
        rhs = sc.base.pairing({c.vmap[k]: 1}, mbar)
        assert lhs == rhs


def test_orbit_sum_violation_detected():
    sd = Seed(["1", "2", "3"], {("1", "2"): 1, ("2", "1"): -1})
    with pytest.raises(ValidationError):
        seed_covering(sd, [["1", "3"], ["2"]])


def test_dimension_vectors():
    assert dimension_vectors(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), min_size=1, max_size=4))
def test_rank_bounded(rows):
    r = matrix_rank(rows)
    assert 0 <= r <= min(len(rows), 3)
    assert matrix_rank(rows + rows) == r
