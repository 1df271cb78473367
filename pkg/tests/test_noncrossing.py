import itertools

import pytest
from hypothesis import given, strategies as st

import oracles
from annular_cumulants.combinatorics import Permutation, all_permutations, tau_shape
from annular_cumulants.noncrossing import (
    AnnulusShape,
    NotAnnularNoncrossing,
    SingletClass,
    SizeBoundExceeded,
    annular_noncrossing,
    bridges,
    check_bound,
    disc_noncrossing,
    euler_char,
    is_annular_noncrossing,
    is_noncrossing_chi,
    is_noncrossing_conditions,
    kreweras,
    kreweras_inverse,
    noncrossing_perms,
    opposite,
    outside_faces,
    outside_faces_kr,
    ps_pairs,
    ps_prime_pairs,
    is_ps_prime,
    singlet_classify,
)

P = Permutation.parse
LEFT = P("(1)(2,10,13,7,6)(3,4,9)(5)(8)(11,12)")
RIGHT = P("(1)(2,13,7,10,6)(3,4)(5)(8)(9)(11,12)")
PI0 = P("(1)(2,6)(3,4)(5)(7,10,13)(8)(9)(11,12)")
S67 = AnnulusShape(6, 7)


def test_annuli_example_complements():
    tau = S67.tau
    assert kreweras(PI0, tau) == P("(1,6)(2,4,5)(3)(7,8,9)(10,12)(11)(13)")
    assert kreweras_inverse(PI0, tau) == P("(1,2)(3,5,6)(4)(7)(8,9,10)(11,13)(12)")
    assert euler_char(PI0, tau) == 4


def test_annuli_example_left_diagram():
    assert is_annular_noncrossing(LEFT, S67)
    assert set(bridges(LEFT, S67)) == {(2, 10, 13, 7, 6), (3, 4, 9)}
    # the complement printed for this diagram is pi^-1 tau, the Kr side
    comp = kreweras(LEFT, S67.tau)
    assert comp == P("(1,6)(2,9)(3)(4,5,7,8)(10,12)(11)(13)")
    assert set(bridges(comp, S67)) == {(2, 9), (4, 5, 7, 8)}
    assert outside_faces_kr(LEFT, S67) == [(2, 4, 5), (7, 8, 9)]
    assert outside_faces(LEFT, S67) == [(3, 5, 6), (8, 9, 10)]


def test_annuli_example_right_diagram():
    assert is_annular_noncrossing(RIGHT, S67)
    assert outside_faces_kr(RIGHT, S67) == [(2, 4, 5), (10, 12)]
    assert outside_faces(RIGHT, S67) == [(3, 5, 6), (11, 13)]


def test_outside_faces_rejects_disc_permutations():
    with pytest.raises(NotAnnularNoncrossing):
        outside_faces(PI0, S67)


def test_textbook_cases():
    t4 = tau_shape(4)
    assert is_noncrossing_chi(P("(1,3)(2)(4)"), t4) and is_noncrossing_conditions(P("(1,3)(2)(4)"), t4)
    assert not is_noncrossing_chi(P("(1,3)(2,4)"), t4) and not is_noncrossing_conditions(P("(1,3)(2,4)"), t4)


def test_dual_characterizations_agree_small():
    for n in range(2, 6):
        for p in range(1, n):
            tau = tau_shape(p, n - p)
            for pi in all_permutations(n):
                assert is_noncrossing_chi(pi, tau) == is_noncrossing_conditions(pi, tau)


@pytest.mark.parametrize("n", range(1, 7))
def test_catalan_counts_match_oracle(n):
    assert len(noncrossing_perms(n)) == oracles.catalan(n) == oracles.count_one_circle_noncrossing(n)


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (1, 4)])
def test_annulus_counts_match_oracle(p, q):
    shape = AnnulusShape(p, q)
    assert (len(disc_noncrossing(shape)), len(annular_noncrossing(shape))) == oracles.count_noncrossing_by_chi(p, q)


def test_frozen_counts():
    frozen = {(1, 1): (1, 1, 1), (1, 2): (2, 4, 3), (2, 2): (4, 18, 9), (1, 3): (5, 15, 10), (2, 3): (10, 72, 30), (3, 3): (25, 300, 100)}
    for (p, q), counts in frozen.items():
        s = AnnulusShape(p, q)
        assert (len(disc_noncrossing(s)), len(annular_noncrossing(s)), len(ps_prime_pairs(s))) == counts


def test_smallest_sets():
    s = AnnulusShape(1, 1)
    assert annular_noncrossing(s) == [P("(1,2)")]
    assert disc_noncrossing(s) == [P("(1)(2)")]


@pytest.mark.parametrize("p,q", [(1, 2), (2, 2), (2, 3)])
def test_ps_prime_generation_matches_filter(p, q):
    s = AnnulusShape(p, q)
    filtered = {(x.partition, x.perm) for x in ps_pairs(s) if is_ps_prime(x, s)}
    assert filtered == {(x.partition, x.perm) for x in ps_prime_pairs(s)}


def test_opposite():
    s = AnnulusShape(3, 2)
    assert opposite(P("(1,4)(2)(3)(5)"), s) == P("(1,5)(2)(3)(4)")


@given(st.integers(1, 3), st.integers(1, 3), st.data())
def test_opposite_is_involution_preserving_noncrossing(p, q, data):
    s = AnnulusShape(p, q)
    pi = data.draw(st.sampled_from(annular_noncrossing(s) + disc_noncrossing(s)))
    assert opposite(opposite(pi, s), s) == pi


def test_singlet_classes():
    assert singlet_classify(P("(1,3)(2)(4)"), tau_shape(4)) is SingletClass.HAS_TWO_SINGLETS
    assert singlet_classify(P("(1,4)(2,3)"), tau_shape(2, 2)) is SingletClass.SPOKE
    assert singlet_classify(P("(1,2)(3)"), tau_shape(3)) is SingletClass.HAS_ADJACENT_PAIR


def test_spokes_counted_by_p():
    for p in range(1, 4):
        s = AnnulusShape(p, p)
        spokes = [pi for pi in annular_noncrossing(s) if singlet_classify(pi, s.tau) is SingletClass.SPOKE]
        assert len(spokes) == p


def test_size_guard(monkeypatch):
    with pytest.raises(SizeBoundExceeded):
        check_bound(11)
    monkeypatch.setenv("ANNULAR_CUMULANTS_MAX_N", "40")
    check_bound(12)
    with pytest.raises(SizeBoundExceeded):
        check_bound(13)
