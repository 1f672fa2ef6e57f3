import pytest

from qpcover.fixtures import load_qp
from qpcover.grassmannian import (QuotCalculator, auto_weighting, count_submodules, coordinate_submodules,
                                  euler_gr, euler_quot_nilp, finite_field_count_oracle,
                                  fixed_point_decomposition, verify_projection_euler)
from qpcover.jacobian import build_truncated_jacobian
from qpcover.quiver import Quiver
from qpcover.seeds import dimension_vectors


@pytest.fixture(scope="module")
def kron_base():
    f = load_qp("kronecker")
    return build_truncated_jacobian(f.quiver, None, 2).projective("2bar")


def test_zero_dimension_vector(kron_base):
    assert euler_gr(kron_base, (0, 0)).value == 1
    r = finite_field_count_oracle(kron_base, (0, 0))
    assert r.value == 1 and r.certificate["polynomial"] == "1"


def test_projective_line(kron_base):
    assert euler_gr(kron_base, (1, 0), method="loc").value == 2
    assert [count_submodules(kron_base, (1, 0), q) for q in (2, 3, 5)] == [3, 4, 6]
    r = finite_field_count_oracle(kron_base, (1, 0))
    assert r.value == 2
    assert r.certificate["polynomial"] == "q + 1"
    assert all(v == 0 for v in r.certificate["held_out"].values())


def test_kronecker_base_weighting_separates_arrows(kron_base):
    wb = auto_weighting(kron_base)
    assert wb is not None
    assert wb.arrow_weights["abar"] != wb.arrow_weights["bbar"]


def test_cover_points(kron):
    p = build_truncated_jacobian(kron.covering.total, None, 2).projective("2")
    assert euler_gr(p, {"1": 1}).value == 1
    assert euler_gr(p, {"3": 1}).value == 1
    assert euler_gr(p, {"1": 1, "3": 1}).value == 1


def test_out_of_range_is_empty(kron_base):
    assert euler_gr(kron_base, (3, 0)).value == 0


def test_a1_quot_values():
    q = Quiver(["1"])
    assert euler_quot_nilp(q, None, "1", {"1": 0}).value == 1
    assert euler_quot_nilp(q, None, "1", {"1": 1}).value == 1
    for n in (2, 3):
        assert euler_quot_nilp(q, None, "1", {"1": n}).value == 0


def test_markov_opposite_quot_matches_oracle():
    f = load_qp("markov")
    calc = QuotCalculator(f.quiver, f.potential, use_opposite=True)
    for n in dimension_vectors(3, 2):
        n = dict(zip(f.quiver.vertices, n))
        loc = calc.quot("a", n, method="loc")
        ff = calc.quot("a", n, method="ff")
        assert loc.value is not None and loc.value == ff.value


def test_truncation_stable_one_order_up(kron):
    calc = QuotCalculator(kron.covering.total, None)
    for n in dimension_vectors(4, 3):
        n = dict(zip(kron.covering.total.vertices, n))
        tot = sum(n.values())
        l = max(tot - 1, 1)
        assert calc.quot("2", n, order=l).value == calc.quot("2", n, order=l + 1).value


def test_coordinate_submodules_are_closed(kron_base):
    masks = coordinate_submodules(kron_base, (1, 0))
    assert len(masks) == 2
    assert coordinate_submodules(kron_base, (1, 1)) == []


@pytest.mark.parametrize("mode", ["gr", "quot"])
@pytest.mark.parametrize("k", ["1", "2"])
def test_projection_euler_kronecker(kron, k, mode):
    for n in dimension_vectors(2, 3):
        nbar = dict(zip(kron.covering.base.vertices, n))
        res = verify_projection_euler(kron.covering, kron.base_potential, kron.potential, k, nbar, mode)
        assert res["conclusive"] and res["equal"], (n, res)


def test_kronecker_p1_row(kron):
    res = verify_projection_euler(kron.covering, None, None, "2", {"1bar": 1, "2bar": 0}, mode="gr")
    assert res["base"] == 2
    assert sorted(r.value for _, r in res["rows"]) == [1, 1]


def test_fixed_point_decomposition(kron):
    c = kron.covering
    p = build_truncated_jacobian(c.total, None, 2).projective("2")
    groups = fixed_point_decomposition(c, p, {"1bar": 1, "2bar": 0}, {"2": 0, "1": 0, "3": 1})
    assert groups == {(("1", 1),): 1, (("3", 1),): 1}


def test_oracle_needs_enough_primes(kron_base):
    r = finite_field_count_oracle(kron_base, (1, 0), primes=(2, 3))
    assert r.value is None and not r.conclusive


def test_oracle_primes_env(monkeypatch, kron_base):
    monkeypatch.setenv("QPCOVER_PRIMES", "2,3,5,7,11")
    r = finite_field_count_oracle(kron_base, (1, 0))
    assert r.value == 2
    assert set(r.certificate["counts"]) == {2, 3, 5, 7, 11}
