"""Exact permutation and set-partition algebra.

Permutations act on explicit ground sets of nonzero integers so that
restrictions keep their original labels.  Composition is right to left:
``compose(a, b)(x) == a(b(x))``.
"""

from __future__ import annotations

import itertools
import json
import re
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Dict, Iterable, Iterator, List, Sequence, Tuple

Rational = Fraction


class GroundMismatch(ValueError):
    pass


def element_key(x: int) -> Tuple[int, bool]:
    """Sort key for signed labels: by absolute value, positive first."""
    return (abs(x), x < 0)


def _cycle_text(cycle: Sequence[int]) -> str:
    return "(" + ",".join(str(x) for x in cycle) + ")"


_CYCLE_RE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str) -> List[Tuple[int, ...]]:
    text = text.strip()
    if not text:
        return []
    stripped = _CYCLE_RE.sub("", text).strip()
    if stripped:
        raise ValueError(f"unparseable cycle notation: {text!r}")
    cycles = []
    for body in _CYCLE_RE.findall(text):
        body = body.strip()
        if not body:
            raise ValueError("empty cycle")
        cycles.append(tuple(int(tok) for tok in body.split(",")))
    return cycles


class Permutation:
    """A bijection of a finite set of integers, immutable and hashable."""

    __slots__ = ("_map", "_ground", "_hash", "_cycles", "_blocks")

    def __init__(self, mapping: Dict[int, int]):
        mapping = dict(mapping)
        if set(mapping.values()) != set(mapping):
            raise ValueError("mapping is not a bijection of its ground set")
        self._map = mapping
        self._ground = tuple(sorted(mapping, key=element_key))
        self._hash = None
        self._cycles = None
        self._blocks = None

    # construction

    @classmethod
    def identity(cls, ground: Iterable[int]) -> "Permutation":
        return cls({x: x for x in ground})

    @classmethod
    def from_cycles(cls, cycles: Iterable[Sequence[int]], ground: Iterable[int] = None) -> "Permutation":
        mapping: Dict[int, int] = {}
        for cyc in cycles:
            for i, x in enumerate(cyc):
                if x in mapping:
                    raise ValueError(f"element {x} repeated in cycle notation")
                mapping[x] = cyc[(i + 1) % len(cyc)]
        if ground is not None:
            ground = list(ground)
            extra = set(mapping) - set(ground)
            if extra:
                raise ValueError(f"cycle elements {sorted(extra)} outside ground set")
            for x in ground:
                mapping.setdefault(x, x)
        return cls(mapping)

    @classmethod
    def parse(cls, text: str, ground: Iterable[int] = None) -> "Permutation":
        return cls.from_cycles(parse_cycles(text), ground)

    @classmethod
    def from_images(cls, images: Sequence[int]) -> "Permutation":
        """Permutation of [n] sending i to images[i-1]."""
        return cls({i + 1: v for i, v in enumerate(images)})

    @classmethod
    def from_json(cls, data) -> "Permutation":
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_cycles(data["cycles"], data["ground"])

    # basic protocol

    @property
    def ground(self) -> Tuple[int, ...]:
        return self._ground

    @property
    def size(self) -> int:
        return len(self._ground)

    def __call__(self, x: int) -> int:
        return self._map[x]

    def items(self):
        return self._map.items()

    def as_dict(self) -> Dict[int, int]:
        return dict(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self._map == other._map

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._map.items()))
        return self._hash

    def __mul__(self, other: "Permutation") -> "Permutation":
        return compose(self, other)

    def __repr__(self) -> str:
        return f"Permutation({str(self)!r})"

    def __str__(self) -> str:
        return "".join(_cycle_text(c) for c in self.cycles())

    # structure

    def cycles(self) -> List[Tuple[int, ...]]:
        """Canonical cycles: each starts at its least element, sorted by that element."""
        if self._cycles is not None:
            return list(self._cycles)
        seen = set()
        out = []
        for x in self._ground:
            if x in seen:
                continue
            cyc = [x]
            seen.add(x)
            y = self._map[x]
            while y != x:
                cyc.append(y)
                seen.add(y)
                y = self._map[y]
            out.append(tuple(cyc))
        self._cycles = tuple(out)
        return out

    def num_cycles(self) -> int:
        return len(self.cycles())

    def cycle_of(self, x: int) -> Tuple[int, ...]:
        cyc = [x]
        y = self._map[x]
        while y != x:
            cyc.append(y)
            y = self._map[y]
        return tuple(cyc)

    def inverse(self) -> "Permutation":
        return Permutation({v: k for k, v in self._map.items()})

    def blocks(self) -> "SetPartition":
        """The partition of the ground set into orbits."""
        if self._blocks is None:
            self._blocks = SetPartition(self.cycles())
        return self._blocks

    def induced(self, subset: Iterable[int]) -> "Permutation":
        return induced(self, subset)

    def is_identity(self) -> bool:
        return all(k == v for k, v in self._map.items())

    def to_json(self) -> dict:
        return {"ground": list(self._ground), "cycles": [list(c) for c in self.cycles()]}


def compose(a: Permutation, b: Permutation) -> Permutation:
    """(a o b)(x) = a(b(x))."""
    if set(a.ground) != set(b.ground):
        raise GroundMismatch("compose: ground sets differ")
    return Permutation({x: a(b(x)) for x in b.ground})


def inverse(a: Permutation) -> Permutation:
    return a.inverse()


def induced(perm: Permutation, subset: Iterable[int]) -> Permutation:
    """Permutation induced on a subset: delete the other elements from the cycles."""
    subset = set(subset)
    if not subset <= set(perm.ground):
        raise GroundMismatch("induced: subset not contained in ground set")
    mapping = {}
    for a in subset:
        y = perm(a)
        while y not in subset:
            y = perm(y)
        mapping[a] = y
    return Permutation(mapping)


def tau_shape(*sizes: int) -> Permutation:
    """The permutation (1..r1)(r1+1..r1+r2)... with the given cycle lengths."""
    cycles = []
    start = 1
    for r in sizes:
        if r < 1:
            raise ValueError("cycle sizes must be positive")
        cycles.append(tuple(range(start, start + r)))
        start += r
    return Permutation.from_cycles(cycles)


class SetPartition:
    """A partition of a finite set of integers into nonempty blocks."""

    __slots__ = ("_blocks", "_ground", "_index", "_hash")

    def __init__(self, blocks: Iterable[Iterable[int]]):
        bl = []
        seen = set()
        for b in blocks:
            b = tuple(sorted(set(b), key=element_key))
            if not b:
                raise ValueError("empty block")
            if seen & set(b):
                raise ValueError("blocks are not disjoint")
            seen |= set(b)
            bl.append(b)
        bl.sort(key=lambda b: element_key(b[0]))
        self._blocks = tuple(bl)
        self._ground = tuple(sorted(seen, key=element_key))
        self._index = {x: i for i, b in enumerate(self._blocks) for x in b}
        self._hash = None

    @classmethod
    def singletons(cls, ground: Iterable[int]) -> "SetPartition":
        return cls([[x] for x in ground])

    @classmethod
    def one(cls, ground: Iterable[int]) -> "SetPartition":
        return cls([list(ground)])

    @classmethod
    def from_json(cls, data) -> "SetPartition":
        if isinstance(data, str):
            data = json.loads(data)
        if isinstance(data, dict):
            data = data["blocks"]
        return cls(data)

    @property
    def blocks(self) -> Tuple[Tuple[int, ...], ...]:
        return self._blocks

    @property
    def ground(self) -> Tuple[int, ...]:
        return self._ground

    def __len__(self) -> int:
        return len(self._blocks)

    def __iter__(self) -> Iterator[Tuple[int, ...]]:
        return iter(self._blocks)

    def block_of(self, x: int) -> Tuple[int, ...]:
        return self._blocks[self._index[x]]

    def same_block(self, x: int, y: int) -> bool:
        return self._index[x] == self._index[y]

    def __eq__(self, other) -> bool:
        return isinstance(other, SetPartition) and self._blocks == other._blocks

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self._blocks)
        return self._hash

    def __repr__(self) -> str:
        return f"SetPartition({[list(b) for b in self._blocks]})"

    def __str__(self) -> str:
        return "{" + ",".join("{" + ",".join(map(str, b)) + "}" for b in self._blocks) + "}"

    def leq(self, other: "SetPartition") -> bool:
        """Refinement order: every block of self lies inside a block of other."""
        _check_ground(self, other)
        return all(len({other._index[x] for x in b}) == 1 for b in self._blocks)

    def restrict(self, subset: Iterable[int]) -> "SetPartition":
        subset = set(subset)
        return SetPartition([[x for x in b if x in subset] for b in self._blocks if subset & set(b)])

    def size_profile(self) -> Tuple[int, ...]:
        return tuple(sorted((len(b) for b in self._blocks), reverse=True))

    def to_json(self) -> dict:
        return {"blocks": [list(b) for b in self._blocks]}


def _check_ground(u: SetPartition, v: SetPartition) -> None:
    if set(u.ground) != set(v.ground):
        raise GroundMismatch("partitions live on different ground sets")


def partition_join(u: SetPartition, v: SetPartition) -> SetPartition:
    """Least upper bound: connected components of the block-overlap graph."""
    _check_ground(u, v)
    parent = {x: x for x in u.ground}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (u, v):
        for b in part.blocks:
            r = find(b[0])
            for x in b[1:]:
                s = find(x)
                if s != r:
                    parent[s] = r
    groups: Dict[int, List[int]] = {}
    for x in u.ground:
        groups.setdefault(find(x), []).append(x)
    return SetPartition(groups.values())


def partition_meet(u: SetPartition, v: SetPartition) -> SetPartition:
    _check_ground(u, v)
    out = []
    for a in u.blocks:
        for b in v.blocks:
            common = set(a) & set(b)
            if common:
                out.append(common)
    return SetPartition(out)


def join_all(parts: Sequence[SetPartition]) -> SetPartition:
    result = parts[0]
    for p in parts[1:]:
        result = partition_join(result, p)
    return result


def set_partitions(ground: Sequence[int]) -> Iterator[SetPartition]:
    """All partitions of ``ground`` (restricted growth order)."""
    ground = list(ground)
    if not ground:
        yield SetPartition([])
        return

    def rec(i: int, blocks: List[List[int]]):
        if i == len(ground):
            yield SetPartition(blocks)
            return
        x = ground[i]
        for b in blocks:
            b.append(x)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([x])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


def coarsenings(u: SetPartition) -> Iterator[SetPartition]:
    """All partitions v with u <= v, obtained by partitioning the blocks of u."""
    blocks = u.blocks
    for grouping in set_partitions(list(range(len(blocks)))):
        yield SetPartition([[x for i in g for x in blocks[i]] for g in grouping.blocks])


def interval(u: SetPartition, w: SetPartition) -> Iterator[SetPartition]:
    """All v with u <= v <= w."""
    if not u.leq(w):
        return
    for v in coarsenings(u):
        if v.leq(w):
            yield v


def mobius_partition(u: SetPartition, v: SetPartition) -> int:
    """Closed-form Mobius function of the partition lattice.

    Returns None when u is not below v.
    """
    if not u.leq(v):
        return None
    result = 1
    for block in v.blocks:
        k = len(u.restrict(block))
        result *= (-1) ** (k - 1) * factorial(k - 1)
    return result


def mobius_partition_recursive(u: SetPartition, v: SetPartition) -> int:
    """Mobius value from the defining recursion over the interval [u, v]."""
    if not u.leq(v):
        return None
    elems = list(interval(u, v))
    elems.sort(key=lambda x: -len(x))
    mu: Dict[SetPartition, int] = {}
    for w in elems:
        if w == u:
            mu[w] = 1
            continue
        mu[w] = -sum(mu[z] for z in mu if z.leq(w) and z != w)
    return mu[v]


def in_gamma_set(u: SetPartition, v: SetPartition, w: SetPartition) -> bool:
    """Whether w attains equality #u - #(u v w) == #(u v v) - #(u v v v w)."""
    uw = partition_join(u, w)
    uv = partition_join(u, v)
    uvw = partition_join(uv, w)
    lhs = len(u) - len(uw)
    rhs = len(uv) - len(uvw)
    assert lhs >= rhs, "geodesic inequality violated"
    return lhs == rhs


@lru_cache(maxsize=None)
def catalan(n: int) -> int:
    return comb(2 * n, n) // (n + 1)


def catalan_weight(size: int) -> int:
    """Signed Catalan factor (-1)^(k-1) C_(k-1) attached to a block of size k."""
    return (-1) ** (size - 1) * catalan(size - 1)


def catalan_product(perm: Permutation) -> int:
    out = 1
    for c in perm.cycles():
        out *= catalan_weight(len(c))
    return out


def double_factorial_odd(n: int) -> int:
    """(2n-1)!!"""
    out = 1
    for k in range(1, 2 * n, 2):
        out *= k
    return out


def all_permutations(n: int) -> Iterator[Permutation]:
    for img in itertools.permutations(range(1, n + 1)):
        yield Permutation.from_images(img)


def format_fraction(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
