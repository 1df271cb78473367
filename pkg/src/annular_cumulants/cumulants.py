"""First-order free cumulants and real second-order free cumulants over abstract
moment oracles.

Letters carry a symbol, a family tag and a transpose flag. A moment oracle
provides alpha1 on cyclic words and alpha2 on pairs of cyclic words; a cumulant
table provides kappa1 and kappa2 the same way. Conversions in both directions
are exact sums over (annular) noncrossing permutations.
"""

from __future__ import annotations

import functools
import itertools
import json
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .combinatorics import Permutation, catalan_product, tau_shape
from .noncrossing import (
    AnnulusShape,
    PsPair,
    annular_noncrossing,
    check_bound,
    disc_noncrossing,
    kreweras,
    noncrossing_perms,
    opposite,
    ps_prime_pairs,
)
from .sd_poset import Tag, mobius_to_top

FIRST_ORDER_BOUND = 8
SECOND_ORDER_BOUND = 7


# Letters and words


@dataclass(frozen=True, order=True)
class Letter:
    symbol: str
    family: str = ""
    transposed: bool = False

    def t(self) -> "Letter":
        return Letter(self.symbol, self.family, not self.transposed)

    def __str__(self) -> str:
        return self.symbol + ("^t" if self.transposed else "")


Word = Tuple[Letter, ...]

_TOKEN = re.compile(r"^([A-Za-z]+)(\w*?)(\^t)?$")


def letter(token: str, family: Optional[str] = None) -> Letter:
    """Parse 'a1' or 'a1^t'; the family defaults to the leading letters of the symbol."""
    m = _TOKEN.match(token.strip())
    if not m:
        raise ValueError(f"bad letter {token!r}")
    symbol = m.group(1) + m.group(2)
    return Letter(symbol, family if family is not None else m.group(1), bool(m.group(3)))


def parse_word(text: str) -> Word:
    return tuple(letter(tok) for tok in text.replace(",", " ").split())


def word_str(word: Word) -> str:
    return " ".join(str(x) for x in word)


def transpose_word(word: Word) -> Word:
    return tuple(x.t() for x in reversed(word))


def _key(word: Word) -> Tuple[str, ...]:
    return tuple(str(x) for x in word)


@functools.lru_cache(maxsize=1 << 16)
def canonical_word(word: Word) -> Word:
    """Least representative under rotation and transpose-reversal."""
    if not word:
        return ()
    best = None
    for w in (tuple(word), transpose_word(word)):
        for i in range(len(w)):
            cand = w[i:] + w[:i]
            if best is None or _key(cand) < _key(best):
                best = cand
    return best


def canonical_pair(w1: Word, w2: Word) -> Tuple[Word, Word]:
    a, b = canonical_word(w1), canonical_word(w2)
    return (a, b) if _key(a) <= _key(b) else (b, a)


def families(word: Word) -> set:
    return {x.family for x in word}


# Oracles


class MissingMoment(KeyError):
    pass


class MomentOracle:
    """alpha1(word) = phi1 of the product; alpha2(w1, w2) = phi2 of the two products."""

    def alpha1(self, word: Word) -> Fraction:
        raise NotImplementedError

    def alpha2(self, w1: Word, w2: Word) -> Fraction:
        raise NotImplementedError


class CumulantTable:
    def kappa1(self, word: Word) -> Fraction:
        raise NotImplementedError

    def kappa2(self, w1: Word, w2: Word) -> Fraction:
        raise NotImplementedError


@functools.lru_cache(maxsize=1 << 16)
def _seeded_value(seed, key: str, span: int = 6) -> Fraction:
    rng = random.Random(f"{seed}|{key}")
    return Fraction(rng.randint(-span, span), rng.randint(1, 4))


class RandomOracle(MomentOracle):
    """Rational moments drawn lazily from a seed, respecting the trace symmetries."""

    def __init__(self, seed):
        self.seed = seed

    def alpha1(self, word: Word) -> Fraction:
        if not word:
            return Fraction(1)
        return _seeded_value(self.seed, "a1:" + word_str(canonical_word(word)))

    def alpha2(self, w1: Word, w2: Word) -> Fraction:
        if not w1 or not w2:
            return Fraction(0)
        a, b = canonical_pair(w1, w2)
        return _seeded_value(self.seed, "a2:" + word_str(a) + "|" + word_str(b))


class RandomCumulants(CumulantTable):
    """Random cumulants; with free=True every cumulant mixing families is zero."""

    def __init__(self, seed, free: bool = False):
        self.seed = seed
        self.free = free

    def kappa1(self, word: Word) -> Fraction:
        if self.free and len(families(word)) > 1:
            return Fraction(0)
        return _seeded_value(self.seed, "k1:" + word_str(canonical_word(word)))

    def kappa2(self, w1: Word, w2: Word) -> Fraction:
        if self.free and len(families(w1) | families(w2)) > 1:
            return Fraction(0)
        a, b = canonical_pair(w1, w2)
        return _seeded_value(self.seed, "k2:" + word_str(a) + "|" + word_str(b))


class TableOracle(MomentOracle):
    """Moments read from explicit tables; a missing word is an error, never zero."""

    def __init__(self, alpha1: Mapping[Word, Fraction], alpha2: Mapping[Tuple[Word, Word], Fraction]):
        self._a1 = {canonical_word(w): Fraction(v) for w, v in alpha1.items()}
        self._a2 = {canonical_pair(*k): Fraction(v) for k, v in alpha2.items()}

    @classmethod
    def from_json(cls, data) -> "TableOracle":
        if isinstance(data, str):
            data = json.loads(data)
        a1 = {parse_word(k): Fraction(v) for k, v in data.get("alpha1", {}).items()}
        a2 = {}
        for k, v in data.get("alpha2", {}).items():
            left, right = k.split("|")
            a2[(parse_word(left), parse_word(right))] = Fraction(v)
        return cls(a1, a2)

    def alpha1(self, word: Word) -> Fraction:
        if not word:
            return Fraction(1)
        try:
            return self._a1[canonical_word(word)]
        except KeyError:
            raise MissingMoment(f"alpha1 missing for word '{word_str(word)}'") from None

    def alpha2(self, w1: Word, w2: Word) -> Fraction:
        if not w1 or not w2:
            return Fraction(0)
        try:
            return self._a2[canonical_pair(w1, w2)]
        except KeyError:
            raise MissingMoment(f"alpha2 missing for '{word_str(w1)}|{word_str(w2)}'") from None


class TableCumulants(CumulantTable):
    def __init__(self, kappa1: Mapping[Word, Fraction], kappa2: Mapping[Tuple[Word, Word], Fraction]):
        self._k1 = {canonical_word(w): Fraction(v) for w, v in kappa1.items()}
        self._k2 = {canonical_pair(*k): Fraction(v) for k, v in kappa2.items()}

    @classmethod
    def from_json(cls, data) -> "TableCumulants":
        if isinstance(data, str):
            data = json.loads(data)
        k1 = {parse_word(k): Fraction(v) for k, v in data.get("kappa1", {}).items()}
        k2 = {}
        for k, v in data.get("kappa2", {}).items():
            left, right = k.split("|")
            k2[(parse_word(left), parse_word(right))] = Fraction(v)
        return cls(k1, k2)

    def kappa1(self, word: Word) -> Fraction:
        try:
            return self._k1[canonical_word(word)]
        except KeyError:
            raise MissingMoment(f"kappa1 missing for word '{word_str(word)}'") from None

    def kappa2(self, w1: Word, w2: Word) -> Fraction:
        try:
            return self._k2[canonical_pair(w1, w2)]
        except KeyError:
            raise MissingMoment(f"kappa2 missing for '{word_str(w1)}|{word_str(w2)}'") from None


# Products over the cycles of a permutation


def letters_of(word: Word, cycle: Sequence[int]) -> Word:
    return tuple(word[i - 1] for i in cycle)


def product_over_cycles(f: Callable[[Word], Fraction], word: Word, perm: Permutation) -> Fraction:
    out = Fraction(1)
    for c in perm.cycles():
        out *= f(letters_of(word, c))
        if out == 0:
            break
    return out


def opposite_word(xs: Word, ys: Word) -> Word:
    """(x1, ..., xp, yq^t, ..., y1^t)"""
    return tuple(xs) + transpose_word(ys)


# First order


def _check_first(n: int) -> None:
    check_bound(n, FIRST_ORDER_BOUND)


@functools.lru_cache(maxsize=None)
def nc_mobius_to_top(pi: Permutation) -> int:
    """mu(pi, tau_n) on the noncrossing lattice: signed Catalan product of the complement."""
    return catalan_product(kreweras(pi, tau_shape(pi.size)))


def free_cumulant(oracle: MomentOracle, word: Word) -> Fraction:
    n = len(word)
    _check_first(n)
    total = Fraction(0)
    for pi in noncrossing_perms(n):
        total += nc_mobius_to_top(pi) * product_over_cycles(oracle.alpha1, word, pi)
    return total


def moment_from_free_cumulants(table: CumulantTable, word: Word) -> Fraction:
    n = len(word)
    if n == 0:
        return Fraction(1)
    _check_first(n)
    return sum((product_over_cycles(table.kappa1, word, pi) for pi in noncrossing_perms(n)), Fraction(0))


# Second order


def _check_second(p: int, q: int) -> AnnulusShape:
    if p < 1 or q < 1:
        raise ValueError("both words must be nonempty")
    check_bound(p + q, SECOND_ORDER_BOUND)
    return AnnulusShape(p, q)


@dataclass(frozen=True)
class _MobiusToTop:
    disc: Dict[Permutation, int]
    hat: Dict[Permutation, int]
    ann: Dict[Permutation, int]


_MU_CACHE: Dict[Tuple[int, int], _MobiusToTop] = {}


def _mu(shape: AnnulusShape) -> _MobiusToTop:
    key = (shape.p, shape.q)
    if key not in _MU_CACHE:
        table = mobius_to_top(shape)
        parts = {Tag.DISC: {}, Tag.HAT: {}, Tag.ANNULAR: {}}
        for e, v in table.items():
            parts[e.tag][e.perm] = v
        _MU_CACHE[key] = _MobiusToTop(parts[Tag.DISC], parts[Tag.HAT], parts[Tag.ANNULAR])
    return _MU_CACHE[key]


def split_pair(pair: PsPair, shape: AnnulusShape) -> Tuple[Permutation, Tuple[int, ...], Tuple[int, ...]]:
    """(pi off the nontrivial block, its outer cycle, its inner cycle)."""
    block = set(pair.nontrivial_block())
    cycles = pair.perm.cycles()
    outer = next(c for c in cycles if c[0] in block and shape.circle(c[0]) == 0)
    inner = next(c for c in cycles if c[0] in block and shape.circle(c[0]) == 1)
    rest = [c for c in cycles if c[0] not in block]
    return Permutation.from_cycles(rest) if rest else None, outer, inner


def _pair_value(f1, f2, pair: PsPair, word: Word, shape: AnnulusShape) -> Fraction:
    rest, outer, inner = split_pair(pair, shape)
    value = f2(letters_of(word, outer), letters_of(word, inner))
    if rest is not None and value != 0:
        value *= product_over_cycles(f1, word, rest)
    return value


def alpha_upi(oracle: MomentOracle, pair: PsPair, xs: Word, ys: Word) -> Fraction:
    """Moment over a PS' pair: first-order moments off the nontrivial block, alpha2 on it."""
    shape = AnnulusShape(len(xs), len(ys))
    return _pair_value(oracle.alpha1, oracle.alpha2, pair, tuple(xs) + tuple(ys), shape)


def kappa_upi(table: CumulantTable, pair: PsPair, xs: Word, ys: Word) -> Fraction:
    shape = AnnulusShape(len(xs), len(ys))
    return _pair_value(table.kappa1, table.kappa2, pair, tuple(xs) + tuple(ys), shape)


def kappa_pq(oracle: MomentOracle, xs: Word, ys: Word) -> Fraction:
    """Second-order cumulant from moments, with Mobius values of the self-dual poset."""
    shape = _check_second(len(xs), len(ys))
    mu = _mu(shape)
    word = tuple(xs) + tuple(ys)
    word_op = opposite_word(xs, ys)
    total = Fraction(0)
    for pi in disc_noncrossing(shape):
        coeff = 2 * (mu.disc[pi] + mu.hat[pi])
        if coeff:
            total += coeff * product_over_cycles(oracle.alpha1, word, pi)
    for pi in annular_noncrossing(shape):
        coeff = mu.ann[pi]
        if coeff:
            total += coeff * (
                product_over_cycles(oracle.alpha1, word, pi) + product_over_cycles(oracle.alpha1, word_op, pi)
            )
    for pair in ps_prime_pairs(shape):
        coeff = mu.hat[pair.perm]
        if coeff:
            total += coeff * _pair_value(oracle.alpha1, oracle.alpha2, pair, word, shape)
    return total


def alpha_pq_from_cumulants(table: CumulantTable, xs: Word, ys: Word) -> Fraction:
    shape = _check_second(len(xs), len(ys))
    word = tuple(xs) + tuple(ys)
    word_op = opposite_word(xs, ys)
    total = Fraction(0)
    for pi in annular_noncrossing(shape):
        total += product_over_cycles(table.kappa1, word, pi)
        total += product_over_cycles(table.kappa1, word_op, pi)
    for pair in ps_prime_pairs(shape):
        total += _pair_value(table.kappa1, table.kappa2, pair, word, shape)
    return total


def alpha_upi_from_cumulants(table: CumulantTable, pair: PsPair, xs: Word, ys: Word) -> Fraction:
    """Cumulant expansion of the moment over a PS' pair (three sums restricted by the partition)."""
    shape = _check_second(len(xs), len(ys))
    u = pair.partition
    word = tuple(xs) + tuple(ys)
    word_op = opposite_word(xs, ys)
    total = Fraction(0)
    for rho in annular_noncrossing(shape):
        if rho.blocks().leq(u):
            total += product_over_cycles(table.kappa1, word, rho)
        if opposite(rho, shape).blocks().leq(u):
            total += product_over_cycles(table.kappa1, word_op, rho)
    for other in ps_prime_pairs(shape):
        if other.partition.leq(u):
            total += _pair_value(table.kappa1, table.kappa2, other, word, shape)
    return total


class CumulantsFromMoments(CumulantTable):
    """Cumulants computed lazily from a moment oracle."""

    def __init__(self, oracle: MomentOracle):
        self.oracle = oracle
        self._k1: Dict[Word, Fraction] = {}
        self._k2: Dict[Tuple[Word, Word], Fraction] = {}

    def kappa1(self, word: Word) -> Fraction:
        key = canonical_word(word)
        if key not in self._k1:
            self._k1[key] = free_cumulant(self.oracle, key)
        return self._k1[key]

    def kappa2(self, w1: Word, w2: Word) -> Fraction:
        key = (tuple(w1), tuple(w2))
        if key not in self._k2:
            self._k2[key] = kappa_pq(self.oracle, w1, w2)
        return self._k2[key]


class MomentsFromCumulants(MomentOracle):
    """Moments computed lazily from a cumulant table."""

    def __init__(self, table: CumulantTable):
        self.table = table
        self._a1: Dict[Word, Fraction] = {}
        self._a2: Dict[Tuple[Word, Word], Fraction] = {}

    def alpha1(self, word: Word) -> Fraction:
        key = canonical_word(word)
        if key not in self._a1:
            self._a1[key] = moment_from_free_cumulants(self.table, key)
        return self._a1[key]

    def alpha2(self, w1: Word, w2: Word) -> Fraction:
        if not w1 or not w2:
            return Fraction(0)
        key = (tuple(w1), tuple(w2))
        if key not in self._a2:
            self._a2[key] = alpha_pq_from_cumulants(self.table, w1, w2)
        return self._a2[key]


# Centring


class CentredOracle(MomentOracle):
    """Moments of the centred letters x - phi1(x), expanded over subsets of positions."""

    def __init__(self, oracle: MomentOracle):
        self.oracle = oracle

    def _means(self, word: Word) -> List[Fraction]:
        return [self.oracle.alpha1((x,)) for x in word]

    def alpha1(self, word: Word) -> Fraction:
        means = self._means(word)
        n = len(word)
        total = Fraction(0)
        for mask in range(1 << n):
            kept = tuple(word[i] for i in range(n) if mask >> i & 1)
            weight = Fraction((-1) ** (n - len(kept)))
            for i in range(n):
                if not mask >> i & 1:
                    weight *= means[i]
            total += weight * self.oracle.alpha1(kept)
        return total

    def alpha2(self, w1: Word, w2: Word) -> Fraction:
        m1, m2 = self._means(w1), self._means(w2)
        total = Fraction(0)
        for mask1 in range(1, 1 << len(w1)):
            k1 = tuple(w1[i] for i in range(len(w1)) if mask1 >> i & 1)
            s1 = Fraction((-1) ** (len(w1) - len(k1)))
            for i in range(len(w1)):
                if not mask1 >> i & 1:
                    s1 *= m1[i]
            for mask2 in range(1, 1 << len(w2)):
                k2 = tuple(w2[j] for j in range(len(w2)) if mask2 >> j & 1)
                s2 = Fraction((-1) ** (len(w2) - len(k2)))
                for j in range(len(w2)):
                    if not mask2 >> j & 1:
                        s2 *= m2[j]
                total += s1 * s2 * self.oracle.alpha2(k1, k2)
        return total


def singlet_free_expansion(table: CumulantTable, xs: Word, ys: Word) -> Fraction:
    """Cumulant terms of the centred second-order moment: those with no singleton."""
    shape = _check_second(len(xs), len(ys))
    word = tuple(xs) + tuple(ys)
    word_op = opposite_word(xs, ys)
    total = Fraction(0)
    for pi in annular_noncrossing(shape):
        if any(len(c) == 1 for c in pi.cycles()):
            continue
        total += product_over_cycles(table.kappa1, word, pi)
        total += product_over_cycles(table.kappa1, word_op, pi)
    for pair in ps_prime_pairs(shape):
        if any(len(b) == 1 for b in pair.partition.blocks):
            continue
        total += _pair_value(table.kappa1, table.kappa2, pair, word, shape)
    return total


# Spoke formula


def spoke_formula(oracle: MomentOracle, xs: Word, ys: Word) -> Fraction:
    """Right side of the second-order freeness condition exactly as displayed:
    two sums of products phi1(x_i y_j) over cyclic shifts, and 0 when p != q.
    """
    p, q = len(xs), len(ys)
    if p != q:
        return Fraction(0)
    total = Fraction(0)
    for k in range(1, p + 1):
        back = Fraction(1)
        fwd = Fraction(1)
        for i in range(p):
            back *= oracle.alpha1((xs[i], ys[(i - k) % p]))
            fwd *= oracle.alpha1((xs[i], ys[(i + k) % p]))
        total += back + fwd
    return total


def spoke_formula_corrected(oracle: MomentOracle, xs: Word, ys: Word) -> Fraction:
    """Spoke sum read off the annular terms of the moment-cumulant relation:
    x_i paired with y_(k-i) in the first sum and with y_(i+k)^t in the second.
    """
    p, q = len(xs), len(ys)
    if p != q:
        return Fraction(0)
    total = Fraction(0)
    for k in range(p):
        reversed_pairs = Fraction(1)
        transposed_pairs = Fraction(1)
        for i in range(p):
            reversed_pairs *= oracle.alpha1((xs[i], ys[(k - i) % p]))
            transposed_pairs *= oracle.alpha1((xs[i], ys[(i + k) % p].t()))
        total += reversed_pairs + transposed_pairs
    return total


def spoke_bruteforce(table: CumulantTable, xs: Word, ys: Word) -> Fraction:
    """Sum of kappa over spoke diagrams, on the word and on its opposite."""
    from .noncrossing import SingletClass, singlet_classify

    shape = _check_second(len(xs), len(ys))
    word = tuple(xs) + tuple(ys)
    word_op = opposite_word(xs, ys)
    total = Fraction(0)
    for pi in annular_noncrossing(shape):
        if singlet_classify(pi, shape.tau) is SingletClass.SPOKE:
            total += product_over_cycles(table.kappa1, word, pi)
            total += product_over_cycles(table.kappa1, word_op, pi)
    return total


# Free products


def cyclic_runs(word: Word) -> List[Word]:
    """Maximal cyclic runs of letters from one family (a single run if only one family)."""
    n = len(word)
    if n == 0 or len(families(word)) == 1:
        return [tuple(word)]
    start = next(i for i in range(n) if word[i].family != word[i - 1].family)
    rotated = word[start:] + word[:start]
    runs = []
    for _, grp in itertools.groupby(rotated, key=lambda x: x.family):
        runs.append(tuple(grp))
    return runs


class FreeProductOracle(MomentOracle):
    """Joint moments of families that are real second-order free.

    First order uses phi1(centred cyclically alternating product) = 0. Second
    order uses the spoke rule given by ``spoke`` (the corrected form by
    default) on centred cyclically alternating runs; phi2 with an empty word is 0.
    """

    def __init__(self, family_oracles: Mapping[str, MomentOracle], spoke: str = "corrected"):
        if spoke not in ("corrected", "literal"):
            raise ValueError("spoke must be 'corrected' or 'literal'")
        self.family_oracles = dict(family_oracles)
        self.spoke = spoke
        self._a1: Dict[Word, Fraction] = {}
        self._a2: Dict[Tuple[Word, Word], Fraction] = {}

    def alpha1(self, word: Word) -> Fraction:
        word = canonical_word(word)
        if not word:
            return Fraction(1)
        if word in self._a1:
            return self._a1[word]
        runs = cyclic_runs(word)
        if len(runs) == 1:
            value = self.family_oracles[word[0].family].alpha1(word)
        else:
            means = [self.alpha1(r) for r in runs]
            m = len(runs)
            value = Fraction(0)
            for mask in range(1 << m):
                if mask == (1 << m) - 1:
                    continue
                kept = tuple(x for i, r in enumerate(runs) if mask >> i & 1 for x in r)
                weight = Fraction((-1) ** (m - bin(mask).count("1")))
                for i in range(m):
                    if not mask >> i & 1:
                        weight *= means[i]
                value -= weight * self.alpha1(kept)
        self._a1[word] = value
        return value

    def _centred_pair(self, b: Word, d: Word, transpose: bool) -> Fraction:
        dd = transpose_word(d) if transpose else d
        return self.alpha1(tuple(b) + tuple(dd)) - self.alpha1(b) * self.alpha1(d)

    def _spoke_value(self, runs1: List[Word], runs2: List[Word]) -> Fraction:
        m = len(runs1)
        if m != len(runs2):
            return Fraction(0)
        total = Fraction(0)
        for k in range(m):
            if self.spoke == "corrected":
                a = Fraction(1)
                b = Fraction(1)
                for i in range(m):
                    a *= self._centred_pair(runs1[i], runs2[(k - i) % m], False)
                    b *= self._centred_pair(runs1[i], runs2[(i + k) % m], True)
                total += a + b
            else:
                a = Fraction(1)
                for i in range(m):
                    a *= self._centred_pair(runs1[i], runs2[(i + k) % m], False)
                total += 2 * a
        return total

    def alpha2(self, w1: Word, w2: Word) -> Fraction:
        if not w1 or not w2:
            return Fraction(0)
        w1, w2 = canonical_pair(w1, w2)
        key = (w1, w2)
        if key in self._a2:
            return self._a2[key]
        runs1, runs2 = cyclic_runs(w1), cyclic_runs(w2)
        if len(runs1) == 1 and len(runs2) == 1 and w1[0].family == w2[0].family:
            value = self.family_oracles[w1[0].family].alpha2(w1, w2)
        else:
            value = self._spoke_value(runs1, runs2)
            c1 = [self.alpha1(r) for r in runs1]
            c2 = [self.alpha1(r) for r in runs2]
            m1, m2 = len(runs1), len(runs2)
            full1, full2 = (1 << m1) - 1, (1 << m2) - 1
            for mask1 in range(1, full1 + 1):
                k1 = tuple(x for i, r in enumerate(runs1) if mask1 >> i & 1 for x in r)
                s1 = Fraction((-1) ** (m1 - bin(mask1).count("1")))
                for i in range(m1):
                    if not mask1 >> i & 1:
                        s1 *= c1[i]
                for mask2 in range(1, full2 + 1):
                    if mask1 == full1 and mask2 == full2:
                        continue
                    k2 = tuple(x for j, r in enumerate(runs2) if mask2 >> j & 1 for x in r)
                    s2 = Fraction((-1) ** (m2 - bin(mask2).count("1")))
                    for j in range(m2):
                        if not mask2 >> j & 1:
                            s2 *= c2[j]
                    value -= s1 * s2 * self.alpha2(k1, k2)
        self._a2[key] = value
        return value


# Freeness checks


def alternating_words(length: int, letters_by_family: Mapping[str, Sequence[Letter]]) -> List[Word]:
    """Words of the given length whose families alternate cyclically (any length-1 word qualifies)."""
    pool = [x for fam in letters_by_family.values() for x in fam]
    out = []
    for combo in itertools.product(pool, repeat=length):
        if length == 1 or all(combo[i].family != combo[i - 1].family for i in range(length)):
            out.append(tuple(combo))
    return out


@dataclass
class FreenessReport:
    checked: int = 0
    violations: List[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _freeness_cases(p: int, q: int, letters_by_family):
    for xs in alternating_words(p, letters_by_family):
        for ys in alternating_words(q, letters_by_family):
            if p == 1 and q == 1 and xs[0].family == ys[0].family:
                continue
            yield xs, ys


def forward_freeness_check(
    seed, letters_by_family, max_p: int = 3, max_q: int = 3, spoke=spoke_formula
) -> FreenessReport:
    """Vanishing mixed cumulants imply the spoke rule on centred cyclically alternating words."""
    joint = MomentsFromCumulants(RandomCumulants(seed, free=True))
    centred = CentredOracle(joint)
    report = FreenessReport()
    for p in range(1, max_p + 1):
        for q in range(1, max_q + 1):
            for xs, ys in _freeness_cases(p, q, letters_by_family):
                lhs = centred.alpha2(xs, ys)
                rhs = spoke(centred, xs, ys)
                report.checked += 1
                if lhs != rhs:
                    report.violations.append(
                        {"xs": word_str(xs), "ys": word_str(ys), "moment": str(lhs), "spoke": str(rhs)}
                    )
    return report


def converse_freeness_check(seed, letters_by_family, max_total: int = 5, spoke: str = "corrected") -> FreenessReport:
    """Moments built to satisfy the spoke rule give vanishing mixed cumulants."""
    fams = {f: RandomOracle(f"{seed}|{f}") for f in letters_by_family}
    joint = FreeProductOracle(fams, spoke=spoke)
    report = FreenessReport()
    pool = [x for fam in letters_by_family.values() for x in fam]
    for n in range(2, max_total + 1):
        for p in range(1, n):
            for combo in itertools.product(pool, repeat=n):
                if len(families(combo)) < 2:
                    continue
                xs, ys = combo[:p], combo[p:]
                if _key(xs) > _key(canonical_word(xs)) or _key(ys) > _key(canonical_word(ys)):
                    continue
                value = kappa_pq(joint, xs, ys)
                report.checked += 1
                if value != 0:
                    report.violations.append({"xs": word_str(xs), "ys": word_str(ys), "kappa": str(value)})
    for n in range(2, max_total + 1):
        for combo in itertools.product(pool, repeat=n):
            if len(families(combo)) < 2 or tuple(combo) != canonical_word(combo):
                continue
            value = free_cumulant(joint, combo)
            report.checked += 1
            if value != 0:
                report.violations.append({"word": word_str(combo), "kappa1": str(value)})
    return report
