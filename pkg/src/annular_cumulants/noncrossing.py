"""Kreweras complements, Euler characteristics and annular noncrossing sets.

Two independent tests decide whether a permutation is noncrossing on a base
permutation with one or two cycles:

* ``is_noncrossing_chi`` compares the Euler characteristic with twice the
  number of connected components;
* ``is_noncrossing_conditions`` scans for forbidden sub-configurations of
  three to six points (the disc conditions for one cycle, the annular
  nonstandard and crossing conditions for two).
"""

from __future__ import annotations

import enum
import itertools
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from .combinatorics import (
    Permutation,
    SetPartition,
    all_permutations,
    compose,
    coarsenings,
    induced,
    partition_join,
    tau_shape,
)

DEFAULT_MAX_N = 10
HARD_MAX_N = 12


class SizeBoundExceeded(ValueError):
    pass


class NotAnnularNoncrossing(ValueError):
    pass


def enumeration_bound() -> int:
    """Exhaustive-enumeration guard, overridable by ANNULAR_CUMULANTS_MAX_N (at most 12)."""
    raw = os.environ.get("ANNULAR_CUMULANTS_MAX_N")
    if raw is None:
        return DEFAULT_MAX_N
    return max(1, min(int(raw), HARD_MAX_N))


def check_bound(n: int, bound: Optional[int] = None) -> None:
    limit = enumeration_bound() if bound is None else bound
    if n > limit:
        raise SizeBoundExceeded(f"size {n} exceeds enumeration bound {limit}")


@dataclass(frozen=True)
class AnnulusShape:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("annulus circles need at least one point each")

    @property
    def n(self) -> int:
        return self.p + self.q

    @property
    def tau(self) -> Permutation:
        return tau_shape(self.p, self.q)

    def outer(self) -> range:
        return range(1, self.p + 1)

    def inner(self) -> range:
        return range(self.p + 1, self.p + self.q + 1)

    def circle(self, x: int) -> int:
        return 0 if x <= self.p else 1


# Kreweras complement and Euler characteristic


def kreweras(pi: Permutation, rho: Permutation) -> Permutation:
    """Kr_rho(pi) = pi^-1 rho."""
    return compose(pi.inverse(), rho)


def kreweras_inverse(pi: Permutation, rho: Permutation) -> Permutation:
    """Kr_rho^-1(pi) = rho pi^-1."""
    return compose(rho, pi.inverse())


def connected_components(pi: Permutation, rho: Permutation) -> int:
    return len(partition_join(pi.blocks(), rho.blocks()))


def euler_char(pi: Permutation, rho: Permutation) -> int:
    chi = rho.num_cycles() + pi.num_cycles() + kreweras(pi, rho).num_cycles() - pi.size
    assert chi <= 2 * connected_components(pi, rho), "Euler characteristic bound violated"
    return chi


def is_noncrossing_chi(pi: Permutation, rho: Permutation) -> bool:
    return euler_char(pi, rho) == 2 * connected_components(pi, rho)


# Forbidden-configuration scans


def _cyclically_increasing(x: int, y: int, z: int) -> bool:
    return x < y < z or y < z < x or z < x < y


def _disc_violation(pi: Permutation, order: Sequence[int]) -> Optional[Tuple[str, tuple]]:
    """Scan the two disc conditions for ``pi`` restricted to ``order`` (a cyclic sequence).

    Returns the first violated condition with its witness, or None.
    """
    pos = {x: i for i, x in enumerate(order)}
    support = set(order)
    restricted = induced(pi, support) if set(pi.ground) != support else pi
    cycles = restricted.cycles()
    # three points of one cycle visited against the base orientation
    for cyc in cycles:
        for a, c, b in itertools.combinations(cyc, 3):
            # pi restricted is (a, c, b); violation when the base order is (a, b, c)
            if _cyclically_increasing(pos[a], pos[b], pos[c]):
                return ("disc-1", (a, b, c))
    # two cycles interleaving
    for c1, c2 in itertools.combinations(cycles, 2):
        for a, c in itertools.combinations(c1, 2):
            for b, d in itertools.combinations(c2, 2):
                pa, pb, pc, pd = pos[a], pos[b], pos[c], pos[d]
                if _cyclically_increasing(pa, pb, pc) != _cyclically_increasing(pa, pd, pc):
                    return ("disc-2", (a, b, c, d))
    return None


def _base_cycles(rho: Permutation) -> List[Tuple[int, ...]]:
    return rho.cycles()


def lambda_sequence(rho: Permutation, x: int, y: int) -> Tuple[int, ...]:
    """(rho(x), ..., rho^-1(x), rho(y), ..., rho^-1(y)) for x, y on different cycles."""
    seq = []
    for start in (x, y):
        z = rho(start)
        while z != start:
            seq.append(z)
            z = rho(z)
    return tuple(seq)


def annular_violation(pi: Permutation, rho: Permutation) -> Optional[Tuple[str, tuple]]:
    """First annular nonstandard / crossing condition met by pi on a two-cycle rho."""
    circles = _base_cycles(rho)
    if len(circles) != 2:
        raise ValueError("annular conditions need a base permutation with two cycles")
    label = {x: i for i, c in enumerate(circles) for x in c}
    pi_cycles = pi.cycles()

    # ans1 and ac1: disc conditions inside each circle
    for circ in circles:
        found = _disc_violation(pi, circ)
        if found is not None:
            name = "ans1" if found[0] == "disc-1" else "ac1"
            return (name, found[1])

    # ans2: a cycle meeting the circles in the pattern (a, c, b, d)
    for cyc in pi_cycles:
        if len({label[z] for z in cyc}) < 2:
            continue
        for a, c, b, d in itertools.combinations(cyc, 4):
            if label[a] == label[b] != label[c] == label[d]:
                return ("ans2", (a, b, c, d))

    # ac2 and ac3: crossings relative to lambda_{x,y} for each bridging pair
    for cyc in pi_cycles:
        for x in cyc:
            for y in cyc:
                if label[x] != 0 or label[y] != 1:
                    continue
                lam = lambda_sequence(rho, x, y)
                rest = [z for z in lam if z not in cyc]
                if len(rest) < 3:
                    continue
                found = _disc_violation(induced(pi, rest), rest)
                if found is not None:
                    name = "ac2" if found[0] == "disc-1" else "ac3"
                    return (name, found[1] + (x, y))
    return None


def is_noncrossing_conditions(pi: Permutation, rho: Permutation) -> bool:
    k = rho.num_cycles()
    if k == 1:
        return _disc_violation(pi, rho.cycles()[0]) is None
    if k == 2:
        return annular_violation(pi, rho) is None
    raise ValueError("condition scan supports base permutations with one or two cycles")


# Annular structure


def restrict_to(pi: Permutation, rho: Permutation) -> Permutation:
    """pi restricted blockwise to the cycles of rho."""
    mapping: Dict[int, int] = {}
    for block in rho.cycles():
        mapping.update(induced(pi, block).as_dict())
    return Permutation(mapping)


def has_bridge(pi: Permutation, shape: AnnulusShape) -> bool:
    return any(len({shape.circle(x) for x in c}) == 2 for c in pi.cycles())


def bridges(pi: Permutation, shape: AnnulusShape) -> List[Tuple[int, ...]]:
    return [c for c in pi.cycles() if len({shape.circle(x) for x in c}) == 2]


def is_disc_noncrossing(pi: Permutation, shape: AnnulusShape) -> bool:
    return not has_bridge(pi, shape) and is_noncrossing_chi(pi, shape.tau)


def is_annular_noncrossing(pi: Permutation, shape: AnnulusShape) -> bool:
    return has_bridge(pi, shape) and is_noncrossing_chi(pi, shape.tau)


def _require_annular(pi: Permutation, shape: AnnulusShape) -> None:
    if not is_annular_noncrossing(pi, shape):
        raise NotAnnularNoncrossing(f"{pi} is not annular noncrossing on {shape.tau}")


def _faces(pi: Permutation, shape: AnnulusShape, complement) -> List[Tuple[int, ...]]:
    _require_annular(pi, shape)
    tau = shape.tau
    marked = {x for c in bridges(complement(pi, tau), shape) for x in c}
    base = complement(restrict_to(pi, tau), tau)
    faces = [c for c in base.cycles() if marked & set(c)]
    assert len(faces) == 2 and {x for c in faces for x in c} == marked, "outside faces malformed"
    return faces


def outside_faces(pi: Permutation, shape: AnnulusShape) -> List[Tuple[int, ...]]:
    """Cycles of tau pi0^-1 carrying the bridges of tau pi^-1 (pi0 = pi restricted to tau)."""
    return _faces(pi, shape, kreweras_inverse)


def outside_faces_kr(pi: Permutation, shape: AnnulusShape) -> List[Tuple[int, ...]]:
    """Same construction with Kr = pi^-1 tau in place of its inverse."""
    return _faces(pi, shape, kreweras)


def opposite_relabel(shape: AnnulusShape) -> Dict[int, int]:
    p, q = shape.p, shape.q
    relabel = {x: x for x in shape.outer()}
    for j in range(1, q + 1):
        relabel[p + j] = p + q + 1 - j
    return relabel


def opposite(pi: Permutation, shape: AnnulusShape) -> Permutation:
    """Swap p+1 with p+q, p+2 with p+q-1, ... in cycle notation."""
    r = opposite_relabel(shape)
    return Permutation({r[x]: r[pi(x)] for x in pi.ground})


class SingletClass(enum.Enum):
    HAS_ADJACENT_PAIR = "HasAdjacentPair"
    HAS_TWO_SINGLETS = "HasTwoSinglets"
    SPOKE = "Spoke"
    OTHER = "Other"


def is_spoke(pi: Permutation, tau: Permutation) -> bool:
    circles = tau.cycles()
    if len(circles) != 2 or len(circles[0]) != len(circles[1]):
        return False
    a = circles[0][0]
    b = pi(a)
    if b not in circles[1] or pi(b) != a:
        return False
    tinv = tau.inverse()
    x, y = a, b
    for _ in range(len(circles[0])):
        if pi(x) != y or pi(y) != x:
            return False
        x, y = tau(x), tinv(y)
    return True


def singlet_classify(pi: Permutation, tau: Permutation) -> SingletClass:
    if not is_noncrossing_chi(pi, tau):
        raise ValueError(f"{pi} is not noncrossing on {tau}")
    blocks = pi.blocks()
    for x in tau.ground:
        y = tau(x)
        if y != x and blocks.same_block(x, y):
            return SingletClass.HAS_ADJACENT_PAIR
    if sum(1 for c in pi.cycles() if len(c) == 1) >= 2:
        return SingletClass.HAS_TWO_SINGLETS
    if is_spoke(pi, tau):
        return SingletClass.SPOKE
    return SingletClass.OTHER


# Enumeration


@lru_cache(maxsize=None)
def _nc_one_cycle(n: int) -> Tuple[Permutation, ...]:
    tau = tau_shape(n)
    return tuple(pi for pi in all_permutations(n) if is_noncrossing_chi(pi, tau))


def noncrossing_perms(n: int) -> List[Permutation]:
    """S_nc(n): permutations of [n] noncrossing on (1,...,n)."""
    check_bound(n)
    return list(_nc_one_cycle(n))


@lru_cache(maxsize=None)
def _annulus_split(p: int, q: int) -> Tuple[Tuple[Permutation, ...], Tuple[Permutation, ...]]:
    shape = AnnulusShape(p, q)
    tau = shape.tau
    disc, ann = [], []
    for pi in all_permutations(p + q):
        if not is_noncrossing_chi(pi, tau):
            continue
        (ann if has_bridge(pi, shape) else disc).append(pi)
    return tuple(disc), tuple(ann)


def disc_noncrossing(shape: AnnulusShape) -> List[Permutation]:
    check_bound(shape.n)
    return list(_annulus_split(shape.p, shape.q)[0])


def annular_noncrossing(shape: AnnulusShape) -> List[Permutation]:
    check_bound(shape.n)
    return list(_annulus_split(shape.p, shape.q)[1])


def annulus_noncrossing(shape: AnnulusShape) -> List[Permutation]:
    """S_nc(p,q): disc and annular noncrossing permutations together."""
    return disc_noncrossing(shape) + annular_noncrossing(shape)


@dataclass(frozen=True)
class PsPair:
    partition: SetPartition
    perm: Permutation

    def nontrivial_block(self) -> Tuple[int, ...]:
        """The block joining two cycles of perm (PS' pairs only)."""
        counts = [b for b in self.partition.blocks if len(self.perm.blocks().restrict(b)) == 2]
        if len(counts) != 1:
            raise ValueError("not a PS' pair")
        return counts[0]


def ps_pairs(shape: AnnulusShape) -> List[PsPair]:
    out = []
    for pi in disc_noncrossing(shape):
        for u in coarsenings(pi.blocks()):
            out.append(PsPair(u, pi))
    return out


def is_ps_prime(pair: PsPair, shape: AnnulusShape) -> bool:
    cycles = pair.perm.blocks()
    joined = 0
    for block in pair.partition.blocks:
        inside = cycles.restrict(block).blocks
        if len(inside) == 1:
            continue
        if len(inside) != 2:
            return False
        sides = sorted(shape.circle(c[0]) for c in inside)
        if sides != [0, 1]:
            return False
        joined += 1
    return joined == 1


def ps_prime_pairs(shape: AnnulusShape) -> List[PsPair]:
    """PS'(p,q), generated directly: a disc permutation plus one cycle from each circle."""
    out = []
    for pi in disc_noncrossing(shape):
        cycles = pi.cycles()
        outer = [c for c in cycles if shape.circle(c[0]) == 0]
        inner = [c for c in cycles if shape.circle(c[0]) == 1]
        for c1 in outer:
            for c2 in inner:
                blocks = [c for c in cycles if c is not c1 and c is not c2] + [c1 + c2]
                out.append(PsPair(SetPartition(blocks), pi))
    return out
