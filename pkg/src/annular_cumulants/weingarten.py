"""Orthogonal Weingarten function at a fixed integer dimension, its normalized
form on set partitions, Weingarten cumulants and their leading coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import factorial, prod
from typing import Dict, Iterator, List, Sequence, Tuple

from .combinatorics import SetPartition, interval, mobius_partition

MAX_HALF_SIZE = 5

Pairing = Tuple[Tuple[int, int], ...]
CosetType = Tuple[int, ...]


class SingularGram(ArithmeticError):
    pass


class ChainViolation(ValueError):
    pass


def pairings(points: Sequence[int]) -> Iterator[Pairing]:
    """All perfect matchings of the points, each pair written (smaller, larger)."""
    points = list(points)
    if not points:
        yield ()
        return
    a = points[0]
    for i in range(1, len(points)):
        rest = points[1:i] + points[i + 1:]
        for tail in pairings(rest):
            yield ((a, points[i]),) + tail


def loop_sizes(first: Pairing, second: Pairing) -> List[int]:
    """Half-sizes of the loops formed by overlaying two matchings."""
    partner1 = {}
    for a, b in first:
        partner1[a], partner1[b] = b, a
    partner2 = {}
    for a, b in second:
        partner2[a], partner2[b] = b, a
    seen = set()
    sizes = []
    for start in partner1:
        if start in seen:
            continue
        length = 0
        x = start
        while True:
            seen.add(x)
            y = partner1[x]
            seen.add(y)
            length += 1
            x = partner2[y]
            if x == start:
                break
        sizes.append(length)
    return sizes


def coset_type(first: Pairing, second: Pairing) -> CosetType:
    return tuple(sorted(loop_sizes(first, second), reverse=True))


def integer_partitions(n: int, largest: int = None) -> Iterator[CosetType]:
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for k in range(min(n, largest), 0, -1):
        for rest in integer_partitions(n - k, k):
            yield (k,) + rest


def bareiss_solve(matrix: List[List[int]], rhs: List[int]) -> List[Fraction]:
    """Exact solution of an integer linear system by fraction-free elimination."""
    n = len(matrix)
    a = [list(row) + [rhs[i]] for i, row in enumerate(matrix)]
    prev = 1
    for k in range(n):
        pivot_row = next((r for r in range(k, n) if a[r][k] != 0), None)
        if pivot_row is None:
            raise SingularGram("singular system")
        if pivot_row != k:
            a[k], a[pivot_row] = a[pivot_row], a[k]
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n + 1):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = pivot
    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        s = Fraction(a[i][n]) - sum(a[i][j] * x[j] for j in range(i + 1, n))
        x[i] = s / a[i][i]
    return x


@dataclass
class WgContext:
    """Weingarten values for matchings of [2n] at dimension N, one per coset type."""

    n: int
    N: int
    values: Dict[CosetType, Fraction] = field(default_factory=dict)

    def __post_init__(self):
        if self.n < 1 or self.n > MAX_HALF_SIZE:
            raise ValueError(f"half-size must be between 1 and {MAX_HALF_SIZE}")
        if self.N < 2 * self.n:
            raise SingularGram(f"dimension N={self.N} below the guard 2n={2 * self.n} (n={self.n})")
        self.values = _coset_values(self.n, self.N)

    def wg_std(self, first: Pairing, second: Pairing) -> Fraction:
        return self.values[coset_type(first, second)]

    def by_type(self, ctype: Sequence[int]) -> Fraction:
        return self.values[tuple(sorted(ctype, reverse=True))]


@lru_cache(maxsize=None)
def _coset_values(n: int, N: int) -> Dict[CosetType, Fraction]:
    points = list(range(1, 2 * n + 1))
    base = tuple((2 * i - 1, 2 * i) for i in range(1, n + 1))
    all_p = list(pairings(points))
    types = list(integer_partitions(n))
    col_type = [coset_type(t, base) for t in all_p]
    # one representative row per coset type
    reps = {}
    for sigma, ct in zip(all_p, col_type):
        reps.setdefault(ct, sigma)
    index = {ct: i for i, ct in enumerate(types)}
    matrix = []
    rhs = []
    for ct in types:
        sigma = reps[ct]
        row = [0] * len(types)
        for t, tt in zip(all_p, col_type):
            row[index[tt]] += N ** len(loop_sizes(sigma, t))
        matrix.append(row)
        rhs.append(1 if sigma == base else 0)
    try:
        sol = bareiss_solve(matrix, rhs)
    except SingularGram as exc:
        raise SingularGram(f"Gram matrix singular at N={N}, n={n}") from exc
    return {ct: sol[index[ct]] for ct in types}


@lru_cache(maxsize=None)
def wg_context(n: int, N: int) -> WgContext:
    return WgContext(n, N)


def gram_matrix(n: int, N: int) -> Tuple[List[Pairing], List[List[int]]]:
    all_p = list(pairings(range(1, 2 * n + 1)))
    return all_p, [[N ** len(loop_sizes(s, t)) for t in all_p] for s in all_p]


# Normalized function on set partitions


def wg_normalized(u: SetPartition, N: int) -> Fraction:
    """wg(u) = N^(2n - #u) Wg(block sizes of u), n the size of the ground set."""
    n = len(u.ground)
    ctype = u.size_profile()
    return N ** (2 * n - len(u)) * wg_context(n, N).by_type(ctype)


def _wg_product(u: SetPartition, x: SetPartition, N: int) -> Fraction:
    out = Fraction(1)
    for block in x.blocks:
        out *= wg_normalized(u.restrict(block), N)
    return out


def wg_cumulant(u: SetPartition, v: SetPartition, w: SetPartition, N: int) -> Fraction:
    if not (u.leq(v) and v.leq(w)):
        raise ChainViolation("need u <= v <= w")
    total = Fraction(0)
    for x in interval(v, w):
        total += mobius_partition(x, w) * _wg_product(u, x, N)
    return total


def wg_cumulant_pair(u: SetPartition, w: SetPartition, N: int) -> Fraction:
    return wg_cumulant(u, u, w, N)


# Leading coefficients


def _gamma(u: SetPartition, v: SetPartition, power_of_two) -> Fraction:
    if not u.leq(v):
        raise ChainViolation("need u <= v")
    out = Fraction(1)
    for block in v.blocks:
        inner = u.restrict(block)
        size, count = len(block), len(inner)
        out *= Fraction(
            (-1) ** (size - count) * power_of_two(count) * factorial(2 * size + count - 3),
            factorial(2 * size),
        )
        out *= prod(Fraction(factorial(2 * len(b) - 1), factorial(len(b) - 1) ** 2) for b in inner.blocks)
    return out


def gamma(u: SetPartition, v: SetPartition) -> Fraction:
    return _gamma(u, v, lambda count: 2 ** (2 * count - 1))


def gamma_sp(u: SetPartition, v: SetPartition) -> Fraction:
    """Quaternionic variant: the power of two is replaced by 2."""
    return _gamma(u, v, lambda count: 2)
