from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from annular_cumulants.combinatorics import (
    GroundMismatch,
    Permutation,
    SetPartition,
    catalan,
    compose,
    in_gamma_set,
    induced,
    mobius_partition,
    mobius_partition_recursive,
    partition_join,
    set_partitions,
    tau_shape,
)

perms = st.integers(1, 7).flatmap(lambda n: st.permutations(range(1, n + 1)).map(Permutation.from_images))


def test_composition_right_to_left():
    a = Permutation.parse("(1,2)", range(1, 4))
    b = Permutation.parse("(2,3)", range(1, 4))
    assert compose(a, b) == Permutation.parse("(1,2,3)")


def test_kreweras_of_annuli_example():
    pi0 = Permutation.parse("(1)(2,6)(3,4)(5)(7,10,13)(8)(9)(11,12)")
    kr = compose(pi0.inverse(), tau_shape(6, 7))
    assert kr == Permutation.parse("(1,6)(2,4,5)(3)(7,8,9)(10,12)(11)(13)")


def test_induced_restriction():
    assert induced(Permutation.parse("(1,3,2)"), {1, 2}) == Permutation.parse("(1,2)")
    pi = Permutation.parse("(1)(2,10,13,7,6)(3,4,9)(5)(8)(11,12)")
    assert induced(pi, range(1, 7)) == Permutation.parse("(1)(2,6)(3,4)(5)")


@given(perms)
def test_inverse_and_identity(p):
    e = Permutation.identity(p.ground)
    assert compose(p, p.inverse()) == e
    assert compose(p, e) == p


@given(perms)
def test_cycle_text_roundtrip(p):
    assert Permutation.parse(str(p), p.ground) == p
    assert Permutation.from_json(p.to_json()) == p


@given(perms, perms)
def test_composition_matches_oracle(a, b):
    if a.ground != b.ground:
        return
    expected = oracles.compose(a.as_dict(), b.as_dict())
    assert compose(a, b).as_dict() == expected


def test_mismatched_grounds_rejected():
    with pytest.raises(GroundMismatch):
        compose(Permutation.parse("(1,2)"), Permutation.parse("(1,2,3)"))


def test_join_examples():
    u = SetPartition([[1, 2], [3]])
    v = SetPartition([[1], [2, 3]])
    assert partition_join(u, v) == SetPartition([[1, 2, 3]])
    assert partition_join(u, SetPartition.singletons([1, 2, 3])) == u
    rho_blocks = SetPartition([[1, 4, 5], [2], [3], [6, 7]])
    assert len(partition_join(rho_blocks, tau_shape(3, 4).blocks())) == 1


@pytest.mark.parametrize("n", range(1, 6))
def test_partition_mobius_matches_oracle(n):
    ground = list(range(1, n + 1))
    parts = list(set_partitions(ground))
    assert len(parts) == [1, 2, 5, 15, 52][n - 1]
    zero = SetPartition.singletons(ground)
    for v in parts:
        expected = oracles.partition_mobius([[x] for x in ground], [list(b) for b in v.blocks])
        assert mobius_partition(zero, v) == expected
        assert mobius_partition_recursive(zero, v) == expected


def test_mobius_values():
    assert mobius_partition(SetPartition.singletons([1, 2, 3]), SetPartition.one([1, 2, 3])) == 2
    assert mobius_partition(SetPartition.singletons(range(1, 5)), SetPartition.one(range(1, 5))) == -6
    u = SetPartition([[1, 2], [3]])
    assert mobius_partition(u, u) == 1


def test_gamma_set_membership():
    u = SetPartition([[1], [2]])
    one = SetPartition([[1, 2]])
    assert in_gamma_set(u, one, u)  # w = 0 always holds
    assert not in_gamma_set(u, one, one)


def _gamma_brute(u, v, w):
    j = partition_join
    return len(u) - len(j(u, w)) == len(j(u, v)) - len(j(j(u, v), w))


def test_gamma_set_exhaustive_on_four_points():
    parts = list(set_partitions([1, 2, 3, 4]))
    found_nontrivial = False
    for u in parts:
        for v in parts:
            for w in parts:
                assert in_gamma_set(u, v, w) == _gamma_brute(u, v, w)
                if len(w) < 4 and in_gamma_set(u, v, w) and partition_join(u, w) != u:
                    found_nontrivial = True
    assert found_nontrivial


@pytest.mark.parametrize("n,c", [(0, 1), (1, 1), (2, 2), (3, 5), (4, 14), (8, 1430)])
def test_catalan(n, c):
    assert catalan(n) == c == oracles.catalan(n)


@settings(max_examples=50)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=3))
def test_tau_shape_cycles(sizes):
    t = tau_shape(*sizes)
    assert sorted(map(len, t.cycles())) == sorted(sizes)
    assert t.size == sum(sizes)
    assert Fraction(t.size) == sum(sizes)
