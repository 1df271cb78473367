"""The self-dual poset built from two copies of the disc-noncrossing permutations
with the annular-noncrossing permutations in between, and its Mobius function.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Iterator, List, Tuple

import numpy as np

from .combinatorics import Permutation, catalan_product, catalan_weight
from .noncrossing import (
    AnnulusShape,
    annular_noncrossing,
    bridges,
    check_bound,
    disc_noncrossing,
    is_noncrossing_chi,
    kreweras,
    kreweras_inverse,
    restrict_to,
)

MOBIUS_BOUND = 7


class Tag(enum.IntEnum):
    DISC = 0
    ANNULAR = 1
    HAT = 2


class IncomparablePair(ValueError):
    pass


@dataclass(frozen=True)
class SdElement:
    tag: Tag
    perm: Permutation
    shape: AnnulusShape

    def __str__(self) -> str:
        mark = {Tag.DISC: "", Tag.ANNULAR: "", Tag.HAT: "^"}[self.tag]
        return f"{self.perm}{mark}"

    def label(self) -> str:
        return f"{self.tag.name.lower()}:{self.perm}"


def bottom(shape: AnnulusShape) -> SdElement:
    return SdElement(Tag.DISC, Permutation.identity(range(1, shape.n + 1)), shape)


def top(shape: AnnulusShape) -> SdElement:
    return SdElement(Tag.HAT, shape.tau, shape)


def elements(shape: AnnulusShape) -> List[SdElement]:
    """All elements, sorted so that a below b implies a precedes b."""
    disc = disc_noncrossing(shape)
    out = [SdElement(Tag.DISC, pi, shape) for pi in disc]
    out += [SdElement(Tag.ANNULAR, pi, shape) for pi in annular_noncrossing(shape)]
    out += [SdElement(Tag.HAT, pi, shape) for pi in disc]
    out.sort(key=lambda e: (e.tag, -e.perm.num_cycles()))
    return out


def perm_leq(pi: Permutation, rho: Permutation) -> bool:
    """Order on disc and annular permutations: partition refinement plus noncrossing on rho."""
    return pi.blocks().leq(rho.blocks()) and is_noncrossing_chi(pi, rho)


def bridges_in_two_cycles(pi: Permutation, rho: Permutation, shape: AnnulusShape) -> bool:
    blocks = rho.blocks()
    touched = {blocks.block_of(x) for c in bridges(pi, shape) for x in c}
    return len(touched) == 2


def sd_leq(a: SdElement, b: SdElement) -> bool:
    if a.shape != b.shape:
        raise ValueError("elements belong to different annuli")
    if b.tag is Tag.HAT:
        if a.tag is Tag.ANNULAR:
            pi0 = restrict_to(a.perm, a.shape.tau)
            return perm_leq(pi0, b.perm) and bridges_in_two_cycles(a.perm, b.perm, a.shape)
        return perm_leq(a.perm, b.perm)
    if a.tag is Tag.HAT:
        return False
    return perm_leq(a.perm, b.perm)


def sd_leq_via_kreweras(a: SdElement, b: SdElement) -> bool:
    """Alternative order test for hatted targets: Kr(b) below Kr(a) in the unhatted order."""
    if b.tag is not Tag.HAT or a.tag is Tag.HAT:
        return sd_leq(a, b)
    tau = a.shape.tau
    return perm_leq(kreweras(b.perm, tau), kreweras(a.perm, tau))


def kr_hat(a: SdElement) -> SdElement:
    tau = a.shape.tau
    tag = {Tag.DISC: Tag.HAT, Tag.HAT: Tag.DISC, Tag.ANNULAR: Tag.ANNULAR}[a.tag]
    return SdElement(tag, kreweras(a.perm, tau), a.shape)


def kr_hat_inverse(a: SdElement) -> SdElement:
    tau = a.shape.tau
    tag = {Tag.DISC: Tag.HAT, Tag.HAT: Tag.DISC, Tag.ANNULAR: Tag.ANNULAR}[a.tag]
    return SdElement(tag, kreweras_inverse(a.perm, tau), a.shape)


# Mobius function from the defining recursion


class MobiusTable:
    """Mobius values of the whole poset, computed from the zeta matrix by back substitution."""

    def __init__(self, shape: AnnulusShape, order=None):
        order = order or sd_leq
        self.shape = shape
        self.elements = elements(shape)
        self.index: Dict[SdElement, int] = {e: i for i, e in enumerate(self.elements)}
        n = len(self.elements)
        zeta = np.zeros((n, n), dtype=np.int64)
        for i, a in enumerate(self.elements):
            for j in range(i, n):
                if order(a, self.elements[j]):
                    zeta[i, j] = 1
        self.zeta = zeta
        # mu(a, b) = -sum_{a <= c < b} mu(a, c), one column at a time
        mu = np.zeros((n, n), dtype=np.int64)
        for j in range(n):
            mu[j, j] = 1
            if j:
                mu[:j, j] = -(mu[:j, :j] @ zeta[:j, j])
        self.mu = mu

    def __len__(self) -> int:
        return len(self.elements)

    def leq(self, a: SdElement, b: SdElement) -> bool:
        return bool(self.zeta[self.index[a], self.index[b]])

    def __call__(self, a: SdElement, b: SdElement) -> int:
        return int(self.mu[self.index[a], self.index[b]])

    def comparable_pairs(self) -> Iterator[Tuple[SdElement, SdElement]]:
        rows, cols = np.nonzero(self.zeta)
        for i, j in zip(rows.tolist(), cols.tolist()):
            yield self.elements[i], self.elements[j]

    def to_top(self) -> Dict[SdElement, int]:
        j = self.index[top(self.shape)]
        return {e: int(self.mu[i, j]) for i, e in enumerate(self.elements)}


@lru_cache(maxsize=None)
def _table(p: int, q: int) -> MobiusTable:
    return MobiusTable(AnnulusShape(p, q))


def mobius_recursive(shape: AnnulusShape, bound: int = MOBIUS_BOUND) -> MobiusTable:
    check_bound(shape.n, bound)
    return _table(shape.p, shape.q)


def mobius_to_top(shape: AnnulusShape) -> Dict[SdElement, int]:
    """mu(a, 1) for every element a."""
    return mobius_recursive(shape).to_top()


# Closed forms


def f_coefficient(r: int, s: int) -> Fraction:
    if r < 1 or s < 1:
        raise ValueError("r and s must be positive")
    sign = (-1) ** (r + s)
    return Fraction(
        sign * 2 * factorial(2 * r - 1) * factorial(2 * s - 1),
        (r + s) * factorial(r - 1) ** 2 * factorial(s - 1) ** 2,
    )


def all_bridge_perms(r: int, s: int) -> Iterator[Permutation]:
    """Annular permutations of tau_{r,s} in which every cycle is a bridge.

    Each has k cycles made of one run of consecutive points on each circle, and
    the runs are met in opposite cyclic orders on the two circles.
    """
    outer = list(range(1, r + 1))
    inner = list(range(r + 1, r + s + 1))
    for k in range(1, min(r, s) + 1):
        for cuts1 in _cut_sets(r, k):
            segs1 = _segments(outer, cuts1)
            for cuts2 in _cut_sets(s, k):
                segs2 = _segments(inner, cuts2)
                for shift in range(k):
                    cycles = [segs1[i] + segs2[(shift - i) % k] for i in range(k)]
                    yield Permutation.from_cycles(cycles)


def _cut_sets(m: int, k: int) -> Iterator[Tuple[int, ...]]:
    return itertools.combinations(range(m), k)


def _segments(points: List[int], starts: Tuple[int, ...]) -> List[Tuple[int, ...]]:
    m = len(points)
    out = []
    for i, st in enumerate(starts):
        end = starts[(i + 1) % len(starts)]
        length = (end - st) % m or m
        out.append(tuple(points[(st + t) % m] for t in range(length)))
    return out


def f_bruteforce(r: int, s: int) -> Fraction:
    if r < 1 or s < 1:
        raise ValueError("r and s must be positive")
    if r + s > 9:
        raise ValueError("brute force limited to r + s <= 9")
    return Fraction(-sum(catalan_product(sigma) for sigma in all_bridge_perms(r, s)))


def _hat_sum(pi: Permutation, rho: Permutation, shape: AnnulusShape) -> Fraction:
    cycles = kreweras(pi, rho).cycles()
    weights = [catalan_weight(len(c)) for c in cycles]
    total = Fraction(0)
    for i, u1 in enumerate(cycles):
        if shape.circle(u1[0]) != 0:
            continue
        for j, u2 in enumerate(cycles):
            if shape.circle(u2[0]) != 1:
                continue
            rest = 1
            for k, w in enumerate(weights):
                if k != i and k != j:
                    rest *= w
            total += f_coefficient(len(u1), len(u2)) * rest
    return total


def mobius_closed(a: SdElement, b: SdElement) -> Fraction:
    """Closed-form Mobius value, with the displayed double-block sum for disc-to-hat pairs."""
    if not sd_leq(a, b):
        raise IncomparablePair(f"{a.label()} is not below {b.label()}")
    if a.tag is Tag.DISC and b.tag is Tag.HAT:
        return _hat_sum(a.perm, b.perm, a.shape)
    return Fraction(catalan_product(kreweras(a.perm, b.perm)))


def mobius_closed_corrected(a: SdElement, b: SdElement) -> Fraction:
    """As mobius_closed, but the disc-to-hat sum also subtracts mu(a^, b) for the hatted copy of a."""
    value = mobius_closed(a, b)
    if a.tag is Tag.DISC and b.tag is Tag.HAT:
        value -= catalan_product(kreweras(a.perm, b.perm))
    return value


@dataclass(frozen=True)
class Discrepancy:
    lower: SdElement
    upper: SdElement
    recursive: int
    closed: Fraction

    def to_json(self) -> dict:
        return {
            "lower": self.lower.label(),
            "upper": self.upper.label(),
            "recursive": self.recursive,
            "closed": str(self.closed),
        }


def discrepancies(shape: AnnulusShape, closed=mobius_closed) -> List[Discrepancy]:
    """Comparable pairs where the closed form disagrees with the recursion."""
    table = mobius_recursive(shape)
    out = []
    for a, b in table.comparable_pairs():
        c = closed(a, b)
        r = table(a, b)
        if c != r:
            out.append(Discrepancy(a, b, r, c))
    return out


def is_hatted_degenerate(d: Discrepancy) -> bool:
    """Disc-to-hat pair with the same underlying permutation."""
    return d.lower.tag is Tag.DISC and d.upper.tag is Tag.HAT and d.lower.perm == d.upper.perm

