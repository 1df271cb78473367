"""Premaps: signed permutations encoding unoriented gluings.

A premap on a set I of positive integers is a permutation m of I and -I with
m(k) = -m^-1(-k), such that k and -k never share a cycle. Cycles come in
mirror pairs; the face representative FD(m) keeps the member of each pair
whose entry of least absolute value is positive.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .combinatorics import (
    Permutation,
    SetPartition,
    element_key,
    in_gamma_set,
    coarsenings,
    parse_cycles,
    partition_join,
)
from .noncrossing import AnnulusShape, check_bound, has_bridge

PREMAP_BOUND = 8


class InvalidPremap(ValueError):
    def __init__(self, k: int, reason: str):
        super().__init__(f"premap axiom fails at k={k}: {reason}")
        self.k = k


def premap_violation(perm: Permutation) -> Optional[Tuple[int, str]]:
    """First k breaking a premap axiom, with the reason, or None."""
    ground = set(perm.ground)
    for k in perm.ground:
        if -k not in ground:
            return (k, "ground set not closed under negation")
    inv = perm.inverse()
    for k in perm.ground:
        if perm(k) != -inv(-k):
            return (abs(k), "m(k) != -m^-1(-k)")
    for cyc in perm.cycles():
        members = set(cyc)
        for k in cyc:
            if -k in members:
                return (abs(k), "k and -k share a cycle")
    return None


class Premap:
    __slots__ = ("perm", "_hash")

    def __init__(self, perm: Permutation):
        bad = premap_violation(perm)
        if bad is not None:
            raise InvalidPremap(*bad)
        self.perm = perm
        self._hash = None

    @classmethod
    def parse(cls, text: str, ground: Iterable[int] = None) -> "Premap":
        """Signed cycle notation; omitted elements of +-ground are fixed points."""
        cycles = parse_cycles(text)
        pts = {abs(x) for c in cycles for x in c}
        if ground is not None:
            pts |= set(ground)
        signed = sorted(pts) + [-k for k in sorted(pts)]
        return cls(Permutation.from_cycles(cycles, signed))

    @classmethod
    def from_face(cls, face: Permutation) -> "Premap":
        """Premap whose face representative is the given permutation on signed points."""
        mapping = dict(face.as_dict())
        for a, b in face.as_dict().items():
            mapping[-b] = -a
        return cls(Permutation(mapping))

    @classmethod
    def identity(cls, ground: Iterable[int]) -> "Premap":
        ground = list(ground)
        return cls(Permutation.identity(ground + [-k for k in ground]))

    @classmethod
    def from_permutation(cls, sigma: Permutation) -> "Premap":
        """sigma on the positives, its mirror on the negatives."""
        return cls.from_face(sigma)

    @property
    def ground(self) -> Tuple[int, ...]:
        return tuple(k for k in self.perm.ground if k > 0)

    @property
    def n(self) -> int:
        return len(self.ground)

    def __call__(self, k: int) -> int:
        return self.perm(k)

    def __eq__(self, other) -> bool:
        return isinstance(other, Premap) and self.perm == other.perm

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(("premap", self.perm))
        return self._hash

    def __str__(self) -> str:
        return str(self.perm)

    def __repr__(self) -> str:
        return f"Premap({self.perm})"

    def inverse(self) -> "Premap":
        return Premap(self.perm.inverse())

    def cycles(self) -> List[Tuple[int, ...]]:
        return self.perm.cycles()

    def blocks(self) -> SetPartition:
        """Pi(m): absolute values of each mirror pair of cycles."""
        return SetPartition({frozenset(abs(x) for x in c) for c in self.perm.cycles()})

    def fd(self) -> Permutation:
        faces = [c for c in self.perm.cycles() if min(c, key=element_key) > 0]
        return Permutation.from_cycles(faces)

    def restrict(self, subset: Iterable[int]) -> "Premap":
        subset = set(subset)
        signed = subset | {-k for k in subset}
        return Premap(self.perm.induced(signed))

    def maps_positives_to_positives(self) -> bool:
        return all(self.perm(k) > 0 for k in self.ground)

    def to_json(self) -> dict:
        return {"ground": list(self.ground), "cycles": [list(c) for c in self.cycles()]}


def pairing_partition(m: Premap) -> SetPartition:
    return m.blocks()


def fd(m: Premap) -> Permutation:
    return m.fd()


def _pairings(points: List[int]) -> Iterator[List[Tuple[int, int]]]:
    if not points:
        yield []
        return
    a = points[0]
    for i in range(1, len(points)):
        rest = points[1:i] + points[i + 1:]
        for tail in _pairings(rest):
            yield [(a, points[i])] + tail


def all_premaps(ground: Sequence[int]) -> Iterator[Premap]:
    """PM(ground) via pairings of the signed points: {a, b} gives m(a) = -b, m(b) = -a.

    Every premap arises exactly once, so there are (2n-1)!! of them.
    """
    ground = list(ground)
    pts = ground + [-k for k in ground]
    for pairing in _pairings(pts):
        mapping = {}
        for a, b in pairing:
            mapping[a] = -b
            mapping[b] = -a
        yield Premap(Permutation(mapping))


# Kreweras complement and Euler characteristic


def _base_maps(base, ground: Sequence[int]) -> Tuple[Dict[int, int], Dict[int, int]]:
    """(right factor, left factor) of the signed Kreweras complement against base."""
    if isinstance(base, Premap):
        face = base.fd()
    else:
        face = base
    signed = list(ground) + [-k for k in ground]
    right = {x: x for x in signed}
    right.update(face.as_dict())
    left = {x: x for x in signed}
    for a, b in face.inverse().as_dict().items():
        left[-a] = -b
    return right, left


def _check_sizes(m: Premap, base) -> None:
    gb = base.ground if isinstance(base, Premap) else tuple(base.ground)
    if set(gb) != set(m.ground):
        raise ValueError("premap and base have different ground sets")


def premap_kreweras(m: Premap, base) -> Premap:
    """(-FD^-1) m FD against a permutation or premap base (FD(tau) = tau)."""
    _check_sizes(m, base)
    right, left = _base_maps(base, m.ground)
    return Premap(Permutation({x: left[m(right[x])] for x in right}))


def premap_kreweras_literal(m: Premap, base) -> Premap:
    """(-FD^-1) m^-1 FD, the form with the inverse in the middle."""
    _check_sizes(m, base)
    right, left = _base_maps(base, m.ground)
    inv = m.perm.inverse()
    return Premap(Permutation({x: left[inv(right[x])] for x in right}))


def base_blocks(base) -> SetPartition:
    return base.blocks()


def premap_euler(m: Premap, base, kreweras=premap_kreweras) -> int:
    kr = kreweras(m, base)
    chi = len(base_blocks(base)) + len(m.blocks()) + len(kr.blocks()) - m.n
    assert chi <= 2 * len(partition_join(base_blocks(base), m.blocks())), "Euler bound violated"
    return chi


def is_noncrossing_premap(m: Premap, base, kreweras=premap_kreweras) -> bool:
    """chi = 2 #(Pi(base) v Pi(m)): every connected component is a sphere."""
    joined = partition_join(base_blocks(base), m.blocks())
    return premap_euler(m, base, kreweras) == 2 * len(joined)


@lru_cache(maxsize=None)
def _pm_nc(base: Permutation) -> Tuple[Premap, ...]:
    return tuple(m for m in all_premaps(base.ground) if is_noncrossing_premap(m, base))


def enumerate_pm_nc(base: Permutation, bound: int = PREMAP_BOUND) -> List[Premap]:
    check_bound(base.size, bound)
    return list(_pm_nc(base))


# PPM' pairs


@dataclass(frozen=True)
class PpmPair:
    partition: SetPartition
    premap: Premap

    def __post_init__(self):
        if not self.premap.blocks().leq(self.partition):
            raise ValueError("partition must be coarser than the premap's blocks")


def is_ppm_prime(pair: PpmPair, tau: Permutation, literal: bool = False) -> bool:
    """U joins as few blocks of Pi(m) as needed to connect Pi(tau) v U.

    The geodesic condition is taken with Pi(m) first. With literal=True the
    arguments are swapped, which rejects every m already connecting the cycles of tau.
    """
    tb = tau.blocks()
    if len(partition_join(tb, pair.partition)) != 1:
        return False
    if not is_noncrossing_premap(pair.premap, tau):
        return False
    if literal:
        return in_gamma_set(tb, pair.premap.blocks(), pair.partition)
    return in_gamma_set(pair.premap.blocks(), tb, pair.partition)


def ppm_prime_pairs(tau: Permutation, bound: int = PREMAP_BOUND, literal: bool = False) -> List[PpmPair]:
    out = []
    for m in enumerate_pm_nc(tau, bound):
        for u in coarsenings(m.blocks()):
            pair = PpmPair(u, m)
            if is_ppm_prime(pair, tau, literal):
                out.append(pair)
    return out


# Trisection of noncrossing premaps on two circles


class PremapFamily(enum.Enum):
    DISC_LIKE = "DiscLike"
    ANN_LIKE = "AnnLike"
    FLIPPED_ANN_LIKE = "FlippedAnnLike"


class NoFamily(ValueError):
    pass


def flip_table(shape: AnnulusShape) -> Dict[int, int]:
    """[p] and -[p+1, p+q] relabelled into [p+q]: -(p+j) goes to p+q+1-j."""
    table = {k: k for k in shape.outer()}
    for j in range(1, shape.q + 1):
        table[-(shape.p + j)] = shape.p + shape.q + 1 - j
    return table


def trisect(m: Premap, shape: AnnulusShape) -> Tuple[PremapFamily, Permutation]:
    if set(m.ground) != set(range(1, shape.n + 1)):
        raise ValueError("premap ground does not match the annulus")
    inv = m.perm.inverse()
    if m.maps_positives_to_positives():
        sigma = Permutation({k: inv(k) for k in m.ground})
        family = PremapFamily.ANN_LIKE if has_bridge(sigma, shape) else PremapFamily.DISC_LIKE
        return family, sigma
    table = flip_table(shape)
    if all(m(x) in table for x in table):
        sigma = Permutation({table[x]: table[inv(x)] for x in table})
        if not has_bridge(sigma, shape):
            raise NoFamily(f"{m} preserves the flipped side but has no bridge")
        return PremapFamily.FLIPPED_ANN_LIKE, sigma
    raise NoFamily(f"{m} fits none of the three families")


def untrisect(family: PremapFamily, sigma: Permutation, shape: AnnulusShape) -> Premap:
    """Inverse of trisect."""
    if family is PremapFamily.FLIPPED_ANN_LIKE:
        table = flip_table(shape)
        back = {v: k for k, v in table.items()}
        inv_sigma = sigma.inverse()
        face = Permutation({x: back[inv_sigma(table[x])] for x in table})
    else:
        face = sigma.inverse()
    return Premap.from_face(face)
