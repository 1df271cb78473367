from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from annular_cumulants.combinatorics import Permutation
from annular_cumulants.noncrossing import AnnulusShape, annular_noncrossing
from annular_cumulants.sd_poset import (
    IncomparablePair,
    SdElement,
    Tag,
    all_bridge_perms,
    bottom,
    discrepancies,
    f_bruteforce,
    f_coefficient,
    is_hatted_degenerate,
    kr_hat,
    kr_hat_inverse,
    mobius_closed,
    mobius_closed_corrected,
    mobius_recursive,
    sd_leq,
    sd_leq_via_kreweras,
    top,
)

P = Permutation.parse


def naive_mobius(shape):
    """mu(a, b) by the textbook recursion over explicit intervals."""
    elems = mobius_recursive(shape).elements
    mu = {}
    for a in elems:
        above = [b for b in elems if sd_leq(a, b)]
        for b in above:  # elements are listed in a linear extension
            if b == a:
                mu[a, b] = 1
            else:
                mu[a, b] = -sum(mu[a, c] for c in above if (a, c) in mu and c != b and sd_leq(c, b))
    return mu


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 2), (1, 3)])
def test_recursive_table_matches_naive(p, q):
    shape = AnnulusShape(p, q)
    table = mobius_recursive(shape)
    for (a, b), value in naive_mobius(shape).items():
        assert table(a, b) == value


def test_smallest_poset():
    s = AnnulusShape(1, 1)
    t = mobius_recursive(s)
    ann = SdElement(Tag.ANNULAR, P("(1,2)"), s)
    assert sd_leq(bottom(s), ann) and sd_leq(ann, top(s))
    assert t(bottom(s), ann) == -1
    assert t(bottom(s), top(s)) == 0
    assert t(ann, top(s)) == -1
    assert mobius_closed(ann, top(s)) == -1


def test_order_is_partial():
    s = AnnulusShape(1, 2)
    a = SdElement(Tag.ANNULAR, P("(1,3)(2)"), s)
    b = SdElement(Tag.ANNULAR, P("(1,3,2)"), s)
    assert sd_leq(a, b) != sd_leq(b, a)


@pytest.mark.parametrize("p,q", [(1, 2), (2, 2), (2, 3)])
def test_two_orders_agree(p, q):
    elems = mobius_recursive(AnnulusShape(p, q)).elements
    for a in elems:
        for b in elems:
            assert sd_leq(a, b) == sd_leq_via_kreweras(a, b)


def test_kreweras_hat_maps():
    s = AnnulusShape(1, 1)
    assert kr_hat(bottom(s)) == top(s)
    ann = SdElement(Tag.ANNULAR, P("(1,2)"), s)
    assert kr_hat(ann) == ann
    for p, q in [(1, 2), (2, 2), (2, 3)]:
        for e in mobius_recursive(AnnulusShape(p, q)).elements:
            assert kr_hat(kr_hat_inverse(e)) == e


def test_one_circle_catalan_case():
    s = AnnulusShape(3, 1)
    t = mobius_recursive(s)
    a = bottom(s)
    b = SdElement(Tag.DISC, P("(1,2,3)(4)"), s)
    assert t(a, b) == 2 == mobius_closed(a, b)


def test_incomparable_rejected():
    s = AnnulusShape(1, 1)
    with pytest.raises(IncomparablePair):
        mobius_closed(top(s), bottom(s))


def test_degenerate_base_case():
    s = AnnulusShape(1, 1)
    (d,) = discrepancies(s)
    assert d.lower == bottom(s) and d.upper == top(s)
    assert (d.recursive, d.closed) == (0, 1)
    assert is_hatted_degenerate(d)


@pytest.mark.parametrize(
    "p,q,total,degenerate", [(1, 1, 1, 1), (1, 2, 3, 2), (2, 2, 9, 4), (1, 3, 12, 5), (2, 3, 36, 10)]
)
def test_discrepancy_census(p, q, total, degenerate):
    found = discrepancies(AnnulusShape(p, q))
    assert len(found) == total
    assert sum(map(is_hatted_degenerate, found)) == degenerate
    assert all(d.lower.tag is Tag.DISC and d.upper.tag is Tag.HAT for d in found)


@pytest.mark.parametrize("p,q", [(1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (1, 4)])
def test_corrected_closed_form_has_no_discrepancies(p, q):
    assert discrepancies(AnnulusShape(p, q), mobius_closed_corrected) == []


def test_f_examples():
    assert f_coefficient(1, 1) == 1 == f_bruteforce(1, 1)
    assert f_coefficient(2, 1) == -4 == f_bruteforce(2, 1)


@given(st.integers(1, 6), st.integers(1, 6))
def test_f_symmetric(r, s):
    assert f_coefficient(r, s) == f_coefficient(s, r)


@pytest.mark.parametrize("r,s", [(r, s) for r in range(1, 5) for s in range(1, 5) if r + s <= 6])
def test_all_bridge_generator_matches_filter(r, s):
    shape = AnnulusShape(r, s)
    filtered = {
        pi for pi in annular_noncrossing(shape) if all(len({shape.circle(x) for x in c}) == 2 for c in pi.cycles())
    }
    generated = list(all_bridge_perms(r, s))
    assert len(generated) == len(set(generated))
    assert set(generated) == filtered


def test_f_closed_form_equals_bruteforce_up_to_eight():
    for r in range(1, 8):
        for s in range(1, 9 - r):
            assert f_coefficient(r, s) == f_bruteforce(r, s), (r, s)
    assert isinstance(f_coefficient(3, 2), Fraction)
