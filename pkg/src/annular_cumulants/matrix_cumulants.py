"""Matrix cumulants, vertex cumulants and their expansions for random matrices
X_1, ..., X_n with orthogonally invariant joint distribution.

Letters are signed indices: -k stands for X_k^T. A trace model returns exact
expectations of products of normalized traces of signed words.
"""

from __future__ import annotations

import itertools
import json
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Sequence, Tuple

from .combinatorics import (
    Permutation,
    SetPartition,
    coarsenings,
    element_key,
    interval,
    mobius_partition,
    parse_cycles,
    partition_join,
    set_partitions,
    tau_shape,
)
from .cumulants import Letter, MomentOracle, Word, kappa_pq
from .noncrossing import check_bound
from .premaps import (
    Premap,
    all_premaps,
    enumerate_pm_nc,
    is_ppm_prime,
    PpmPair,
    premap_euler,
    premap_kreweras,
)
from .weingarten import pairings, wg_context, wg_cumulant, wg_normalized

MATRIX_BOUND = 5

SignedWord = Tuple[int, ...]


class MissingTrace(KeyError):
    pass


# Words and premaps


def canonical_signed_word(word: Sequence[int]) -> SignedWord:
    """Least rotation of the word or of its transpose (reversed, signs flipped)."""
    word = tuple(word)
    if not word:
        return ()
    mirror = tuple(-x for x in reversed(word))
    best = None
    for w in (word, mirror):
        for i in range(len(w)):
            cand = w[i:] + w[:i]
            key = tuple(element_key(x) for x in cand)
            if best is None or key < best[0]:
                best = (key, cand)
    return best[1]


def canonical_multiset(words: Iterable[Sequence[int]]) -> Tuple[SignedWord, ...]:
    return tuple(sorted((canonical_signed_word(w) for w in words), key=lambda w: [element_key(x) for x in w]))


def multiset_str(words: Iterable[Sequence[int]]) -> str:
    return "".join("(" + ",".join(str(x) for x in w) + ")" for w in canonical_multiset(words))


def parse_multiset(text: str) -> Tuple[SignedWord, ...]:
    return canonical_multiset(parse_cycles(text))


def premap_words(pi: Premap) -> List[SignedWord]:
    return [tuple(c) for c in pi.fd().cycles()]


def parse_fd(text: str, ground: Iterable[int] = None) -> Premap:
    """Premap from its face representative, e.g. '(1,5,-4)(6,-7)'; missing points are fixed."""
    cycles = parse_cycles(text)
    pts = {abs(x) for c in cycles for x in c}
    if ground is not None:
        pts |= set(ground)
    listed = {x for c in cycles for x in c}
    cycles = list(cycles) + [(k,) for k in sorted(pts) if k not in listed and -k not in listed]
    return Premap.from_face(Permutation.from_cycles(cycles))


def premap_from_permutation(sigma: Permutation) -> Premap:
    return Premap.from_permutation(sigma)


_PM_CACHE: Dict[Tuple[int, ...], List[Premap]] = {}


def _premaps_on(ground: Sequence[int]) -> List[Premap]:
    key = tuple(ground)
    if key not in _PM_CACHE:
        _PM_CACHE[key] = list(all_premaps(key))
    return _PM_CACHE[key]


def euler(pi: Premap, base) -> int:
    return premap_euler(pi, base)


# Trace models


class TraceModel:
    """E(tr(w_1) ... tr(w_m)) for signed words, with tr the normalized trace."""

    def moment(self, words: Sequence[Sequence[int]]) -> Fraction:
        raise NotImplementedError

    def trace_of(self, pi: Premap) -> Fraction:
        return self.moment(premap_words(pi))

    def classical_cumulant(self, words: Sequence[Sequence[int]]) -> Fraction:
        """k_m(tr w_1, ..., tr w_m) by Mobius inversion over set partitions of the words."""
        words = [tuple(w) for w in words]
        m = len(words)
        if m == 0:
            return Fraction(1)
        top = SetPartition.one(range(m))
        total = Fraction(0)
        for u in set_partitions(list(range(m))):
            mu = mobius_partition(u, top)
            value = Fraction(mu)
            for block in u.blocks:
                value *= self.moment([words[i] for i in block])
                if value == 0:
                    break
            total += value
        return total

    def cumulant_of(self, v: SetPartition, rho: Premap) -> Fraction:
        """k_(V, rho): product over blocks of V of the cumulant of the traces of rho there."""
        out = Fraction(1)
        for block in v.blocks:
            out *= self.classical_cumulant(premap_words(rho.restrict(block)))
            if out == 0:
                break
        return out


def _seeded(seed, key: str) -> Fraction:
    rng = random.Random(f"{seed}|{key}")
    return Fraction(rng.randint(-9, 9), rng.randint(1, 5))


class RandomTraceModel(TraceModel):
    """Random rational trace moments, invariant under rotation and transposition of each word."""

    def __init__(self, seed):
        self.seed = seed

    def moment(self, words):
        words = [w for w in words]
        if not words:
            return Fraction(1)
        return _seeded(self.seed, multiset_str(words))


class TableTraceModel(TraceModel):
    """Moments read from a table keyed by multisets of words; missing entries are errors."""

    def __init__(self, table: Mapping[str, Fraction]):
        self.table = {multiset_str(parse_multiset(k)): Fraction(v) for k, v in table.items()}

    def moment(self, words):
        if not words:
            return Fraction(1)
        key = multiset_str(words)
        try:
            return self.table[key]
        except KeyError:
            raise MissingTrace(f"no trace moment for {key}") from None


Matrix = Tuple[Tuple[Fraction, ...], ...]


def as_matrix(rows) -> Matrix:
    return tuple(tuple(Fraction(x) for x in row) for row in rows)


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(len(b))) for j in range(len(b[0]))) for i in range(len(a)))


def mat_t(a: Matrix) -> Matrix:
    return tuple(zip(*a))


def mat_trace(a: Matrix) -> Fraction:
    return sum((a[i][i] for i in range(len(a))), Fraction(0))


def mat_identity(k: int) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(k)) for i in range(k))


@dataclass
class HaarConjugatedModel(TraceModel):
    """X_k = A_k (x) I or O (B_k (x) I) O^T with one Haar orthogonal O, at dimension N.

    Every A_k, B_k is a small block x block rational matrix repeated down the
    diagonal, so N must be a multiple of the block size. Expectations are exact,
    computed by the Weingarten formula over the pairings of O entries. Conjugating
    everything by a further independent Haar matrix leaves all traces unchanged,
    so these are the trace moments of an orthogonally invariant ensemble in which
    the conjugated letters are independent of the others and in general position.
    """

    matrices: Dict[int, Matrix]
    conjugated: Dict[int, bool]
    N: int
    block: int = 2
    _cache: Dict[Tuple[SignedWord, ...], Fraction] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.N % self.block:
            raise ValueError(f"N={self.N} is not a multiple of the block size {self.block}")
        self.matrices = {k: as_matrix(m) for k, m in self.matrices.items()}
        for k, m in self.matrices.items():
            if len(m) != self.block or any(len(r) != self.block for r in m):
                raise ValueError(f"matrix {k} is not {self.block}x{self.block}")

    def at(self, N: int) -> "HaarConjugatedModel":
        return HaarConjugatedModel(self.matrices, self.conjugated, N, self.block)

    def letter_matrix(self, x: int) -> Matrix:
        m = self.matrices[abs(x)]
        return mat_t(m) if x < 0 else m

    def product(self, word: Sequence[int]) -> Matrix:
        out = mat_identity(self.block)
        for x in word:
            out = mat_mul(out, self.letter_matrix(x))
        return out

    def small_trace(self, word: Sequence[int]) -> Fraction:
        """Normalized trace of the word, which does not depend on N for block-repeated letters."""
        return mat_trace(self.product(word)) / self.block

    def _is_conj(self, x: int) -> bool:
        return bool(self.conjugated.get(abs(x), False))

    def moment(self, words):
        key = canonical_multiset(words)
        if key in self._cache:
            return self._cache[key]
        value = Fraction(1)
        mixed = []
        for w in key:
            flags = {self._is_conj(x) for x in w}
            if len(flags) <= 1:
                value *= self.small_trace(w)
            else:
                mixed.append(w)
        if mixed and value != 0:
            value *= self._mixed_moment(mixed)
        self._cache[key] = value
        return value

    def _mixed_moment(self, words: List[SignedWord]) -> Fraction:
        # each conjugated run C contributes O_{a b} C_{b b'} O_{a' b'}; entries 2g and 2g+1
        row_edges = []  # (matrix, start entry, end entry)
        col_edges = []
        g = 0
        for w in words:
            start = next(i for i in range(len(w)) if self._is_conj(w[i]) and not self._is_conj(w[i - 1]))
            w = w[start:] + w[:start]
            runs = [list(grp) for _, grp in itertools.groupby(w, key=self._is_conj)]
            first_block = g
            k = len(runs) // 2
            for j in range(k):
                c_run, d_run = runs[2 * j], runs[2 * j + 1]
                col_edges.append((self.product(c_run), 2 * g, 2 * g + 1))
                nxt = first_block + (j + 1) % k
                row_edges.append((self.product(d_run), 2 * g + 1, 2 * nxt))
                g += 1
        m = g
        ctx = wg_context(m, self.N)
        entries = list(range(2 * m))
        all_p = list(pairings(entries))
        rows = [self._network_value(row_edges, p) for p in all_p]
        cols = [self._network_value(col_edges, p) for p in all_p]
        total = Fraction(0)
        for i, s in enumerate(all_p):
            if rows[i] == 0:
                continue
            for j, t in enumerate(all_p):
                if cols[j] == 0:
                    continue
                total += ctx.wg_std(s, t) * rows[i] * cols[j]
        return total / Fraction(self.N) ** len(words)

    def _network_value(self, edges, pairing) -> Fraction:
        """Product over loops of Tr_N of the matrices met along the loop."""
        partner = {}
        for a, b in pairing:
            partner[a], partner[b] = b, a
        at_point = {}
        for idx, (_, s, t) in enumerate(edges):
            at_point[s] = (idx, True)
            at_point[t] = (idx, False)
        used = set()
        value = Fraction(1)
        scale = Fraction(self.N, self.block)
        for idx0 in range(len(edges)):
            if idx0 in used:
                continue
            prod = mat_identity(self.block)
            idx, forward = idx0, True
            start_point = edges[idx0][1]
            while True:
                used.add(idx)
                mat, s, t = edges[idx]
                prod = mat_mul(prod, mat if forward else mat_t(mat))
                end = t if forward else s
                nxt = partner[end]
                if nxt == start_point:
                    break
                idx, forward = at_point[nxt]
            value *= scale * mat_trace(prod)
            if value == 0:
                break
        return value

    @classmethod
    def from_json(cls, data, N: int = None) -> "HaarConjugatedModel":
        if isinstance(data, str):
            data = json.loads(data)
        letters = data["letters"]
        matrices = {int(k): v["matrix"] for k, v in letters.items()}
        conj = {int(k): bool(v.get("conjugated", False)) for k, v in letters.items()}
        return cls(matrices, conj, N if N is not None else int(data.get("N", 8)), int(data.get("block", 2)))

    def to_json(self) -> dict:
        return {
            "type": "haar",
            "block": self.block,
            "N": self.N,
            "letters": {
                str(k): {"matrix": [[str(x) for x in row] for row in m], "conjugated": self._is_conj(k)}
                for k, m in sorted(self.matrices.items())
            },
        }


class SumModel(TraceModel):
    """X_k = A_k + O B_k O^T, expanded multilinearly over a model holding both parts.

    The deterministic part of letter k is letter k of the base model and the
    conjugated part is letter k + offset.
    """

    def __init__(self, deterministic: Mapping[int, Matrix], conjugated: Mapping[int, Matrix], N: int, block: int = 2):
        self.deterministic = {k: as_matrix(m) for k, m in deterministic.items()}
        self.conjugated_parts = {k: as_matrix(m) for k, m in conjugated.items()}
        self.offset = 10 ** len(str(max(self.deterministic)))
        mats = dict(self.deterministic)
        mats.update({k + self.offset: m for k, m in self.conjugated_parts.items()})
        flags = {k: k > self.offset for k in mats}
        self.base = HaarConjugatedModel(mats, flags, N, block)
        self.N = N
        self.block = block
        self._cache: Dict[Tuple[SignedWord, ...], Fraction] = {}

    def at(self, N: int) -> "SumModel":
        return SumModel(self.deterministic, self.conjugated_parts, N, self.block)

    def _choices(self, x: int) -> List[int]:
        k = abs(x)
        out = []
        if k in self.deterministic:
            out.append(k)
        if k in self.conjugated_parts:
            out.append(k + self.offset)
        return [c if x > 0 else -c for c in out]

    def moment(self, words):
        key = canonical_multiset(words)
        if key in self._cache:
            return self._cache[key]
        flat = [x for w in key for x in w]
        lengths = [len(w) for w in key]
        total = Fraction(0)
        for pick in itertools.product(*(self._choices(x) for x in flat)):
            expanded, i = [], 0
            for n in lengths:
                expanded.append(tuple(pick[i:i + n]))
                i += n
            total += self.base.moment(expanded)
        self._cache[key] = total
        return total


def load_model(data, N: int = None) -> TraceModel:
    """Trace model from a JSON fixture: type 'haar', 'table' or 'random'."""
    if isinstance(data, str):
        data = json.loads(data)
    kind = data.get("type")
    if kind == "haar":
        return HaarConjugatedModel.from_json(data, N)
    if kind == "table":
        return TableTraceModel(data["moments"])
    if kind == "random":
        return RandomTraceModel(data.get("seed", 0))
    raise ValueError(f"unknown model type {kind!r}")


# Matrix cumulants


class MatrixCumulants:
    """c_rho for premaps rho on any subset of the letters, computed from a trace model at dimension N."""

    def __init__(self, model: TraceModel, N: int, bound: int = MATRIX_BOUND):
        self.model = model
        self.N = N
        self.bound = bound
        self._cache: Dict[Premap, Fraction] = {}

    def __call__(self, rho: Premap) -> Fraction:
        if rho not in self._cache:
            self._cache[rho] = matrix_cumulant(self.model, rho, self.N, self.bound)
        return self._cache[rho]


def matrix_cumulant(model: TraceModel, rho: Premap, N: int, bound: int = MATRIX_BOUND) -> Fraction:
    """c_rho = sum over pi of N^(chi_rho(pi) - 2#Pi(rho)) wg(Pi(Kr_rho(pi))) E(tr_pi)."""
    n = rho.n
    if n == 0:
        return Fraction(1)
    check_bound(n, bound)
    r = len(rho.blocks())
    total = Fraction(0)
    for pi in _premaps_on(rho.ground):
        e = model.trace_of(pi)
        if e == 0:
            continue
        kr = premap_kreweras(pi, rho)
        chi = len(rho.blocks()) + len(pi.blocks()) + len(kr.blocks()) - n
        total += Fraction(N) ** (chi - 2 * r) * wg_normalized(kr.blocks(), N) * e
    return total


def trace_from_cumulants(c: Callable[[Premap], Fraction], pi: Premap, N: int) -> Fraction:
    """E(tr_pi) = sum over rho of N^(chi_pi(rho) - 2#Pi(pi)) c_rho."""
    r = len(pi.blocks())
    total = Fraction(0)
    for rho in _premaps_on(pi.ground):
        total += Fraction(N) ** (euler(rho, pi) - 2 * r) * c(rho)
    return total


def c_pair(c: Callable[[Premap], Fraction], u: SetPartition, pi: Premap) -> Fraction:
    """c_(U, pi): product over the blocks of U of c on the restriction of pi."""
    out = Fraction(1)
    for block in u.blocks:
        out *= c(pi.restrict(block))
        if out == 0:
            break
    return out


def vertex_cumulant(c: Callable[[Premap], Fraction], u: SetPartition, pi: Premap) -> Fraction:
    """K_(U, pi) = sum over Pi(pi) <= V <= U of mu(V, U) c_(V, pi)."""
    base = pi.blocks()
    if not base.leq(u):
        raise ValueError("U must be coarser than Pi(pi)")
    total = Fraction(0)
    for v in interval(base, u):
        total += mobius_partition(v, u) * c_pair(c, v, pi)
    return total


def vertex_cumulants(c: Callable[[Premap], Fraction], pi: Premap) -> Dict[SetPartition, Fraction]:
    return {u: vertex_cumulant(c, u, pi) for u in coarsenings(pi.blocks())}


def matrix_from_vertex(table: Mapping[SetPartition, Fraction]) -> Fraction:
    """c_pi = sum over U >= Pi(pi) of K_(U, pi)."""
    return sum(table.values(), Fraction(0))


class RandomMatrixCumulants:
    """Random c-values; with a split set, c vanishes across the split and factorizes otherwise."""

    def __init__(self, seed, split: Iterable[int] = None):
        self.seed = seed
        self.split = None if split is None else frozenset(split)

    def _raw(self, rho: Premap, tag: str) -> Fraction:
        if rho.n == 0:
            return Fraction(1)
        return _seeded(self.seed, tag + str(rho))

    def __call__(self, rho: Premap) -> Fraction:
        if self.split is None:
            return self._raw(rho, "c")
        inside = [k for k in rho.ground if k in self.split]
        outside = [k for k in rho.ground if k not in self.split]
        for block in rho.blocks().blocks:
            if any(k in self.split for k in block) and any(k not in self.split for k in block):
                return Fraction(0)
        return self._raw(rho.restrict(inside), "c1") * self._raw(rho.restrict(outside), "c2")


# Log generating function


def _log_multilinear_top(coeffs: Mapping[int, Fraction], r: int) -> Fraction:
    """Coefficient of x_1...x_r in log(1 + sum_I coeffs[I] x^I), with I a nonempty bitmask."""
    full = (1 << r) - 1
    power = {0: Fraction(1)}
    total = Fraction(0)
    for k in range(1, r + 1):
        nxt: Dict[int, Fraction] = {}
        for mask, value in power.items():
            for extra, c in coeffs.items():
                if mask & extra or c == 0:
                    continue
                m = mask | extra
                nxt[m] = nxt.get(m, Fraction(0)) + value * c
        power = nxt
        total += Fraction((-1) ** (k - 1), k) * power.get(full, Fraction(0))
    return total


@dataclass
class LogGeneratingReport:
    pi: str
    from_log: Fraction
    from_mobius: Fraction

    @property
    def ok(self) -> bool:
        return self.from_log == self.from_mobius

    def to_json(self) -> dict:
        return {"pi": self.pi, "log": str(self.from_log), "mobius": str(self.from_mobius), "ok": self.ok}


def log_generating_check(c: Callable[[Premap], Fraction], pi: Premap) -> LogGeneratingReport:
    blocks = pi.blocks().blocks
    r = len(blocks)
    if r > 5:
        raise ValueError("log generating check limited to at most 5 cycles")
    coeffs = {}
    for mask in range(1, 1 << r):
        pts = [x for i in range(r) if mask >> i & 1 for x in blocks[i]]
        coeffs[mask] = c(pi.restrict(pts))
    from_log = _log_multilinear_top(coeffs, r)
    from_mobius = vertex_cumulant(c, SetPartition.one(pi.ground), pi)
    return LogGeneratingReport(str(pi.fd()), from_log, from_mobius)


# Connected diagrams


def connected_diagram_sum(model: TraceModel, u: SetPartition, pi: Premap, N: int) -> Fraction:
    """Vertex cumulant as the sum over (rho, V, W) with Pi(pi) v V v W = U of
    N^(chi_pi(rho) - 2#Pi(pi)) wg_(Pi(Kr_pi(rho)), W) k_(V, rho).
    """
    n = pi.n
    check_bound(n, 4)
    base = pi.blocks()
    r = len(base)
    total = Fraction(0)
    for rho in _premaps_on(pi.ground):
        kr = premap_kreweras(rho, pi)
        kb = kr.blocks()
        power = Fraction(N) ** (euler(rho, pi) - 2 * r)
        for v in coarsenings(rho.blocks()):
            if not v.leq(u):
                continue
            kv = None
            for w in coarsenings(kb):
                if partition_join(partition_join(base, v), w) != u:
                    continue
                if kv is None:
                    kv = model.cumulant_of(v, rho)
                if kv == 0:
                    break
                total += power * wg_cumulant(kb, kb, w, N) * kv
    return total


# Classical cumulants of traces


def tau_premap(sizes: Sequence[int]) -> Premap:
    return Premap.from_permutation(tau_shape(*sizes))


@dataclass
class ExpansionReport:
    sizes: Tuple[int, ...]
    classical: Fraction
    vertex_sum: Fraction
    unfiltered_sum: Fraction
    moment: Fraction

    @property
    def ok(self) -> bool:
        return self.classical == self.vertex_sum and self.unfiltered_sum == self.moment

    def to_json(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "classical": str(self.classical),
            "vertex_sum": str(self.vertex_sum),
            "unfiltered_sum": str(self.unfiltered_sum),
            "moment": str(self.moment),
            "ok": self.ok,
        }


def classical_to_vertex_expansion(model: TraceModel, sizes: Sequence[int], N: int) -> ExpansionReport:
    """k_m of the traces of tau against the sum of N^(chi_tau(pi) - 2m) K_(U, pi) with Pi(tau) v U = 1.

    The same sum without the connectivity filter must give the full moment.
    """
    sizes = tuple(sizes)
    n = sum(sizes)
    check_bound(n, 4)
    tau = tau_premap(sizes)
    m = len(sizes)
    one = SetPartition.one(range(1, n + 1))
    tb = tau.blocks()
    c = MatrixCumulants(model, N)
    filtered = Fraction(0)
    unfiltered = Fraction(0)
    for pi in _premaps_on(tau.ground):
        power = Fraction(N) ** (euler(pi, tau) - 2 * m)
        for u in coarsenings(pi.blocks()):
            k = vertex_cumulant(c, u, pi)
            if k == 0:
                continue
            unfiltered += power * k
            if partition_join(tb, u) == one:
                filtered += power * k
    classical = model.classical_cumulant(premap_words(tau))
    return ExpansionReport(sizes, classical, filtered, unfiltered, model.trace_of(tau))


# Asymptotics


def fit_slope(ns: Sequence[int], values: Sequence[Fraction]) -> float:
    """Least-squares slope of log|value| against log N."""
    if any(v == 0 for v in values):
        return float("-inf")
    xs = [math.log(n) for n in ns]
    ys = [math.log(abs(float(v))) for v in values]
    mx, my = sum(xs) / len(xs), sum(ys) / len(ys)
    return sum((x - mx) * (y - my) for x, y in zip(xs, ys)) / sum((x - mx) ** 2 for x in xs)


def richardson(ns: Sequence[int], values: Sequence[Fraction]) -> Fraction:
    """Value at 1/N = 0 of the polynomial in 1/N through the given points (Neville)."""
    hs = [Fraction(1, n) for n in ns]
    p = [Fraction(v) for v in values]
    k = len(hs)
    for level in range(1, k):
        for i in range(k - level):
            j = i + level
            p[i] = (hs[j] * p[i] - hs[i] * p[i + 1]) / (hs[j] - hs[i])
    return p[0]


@dataclass
class OrderSweep:
    sizes: Tuple[int, ...]
    dims: Tuple[int, ...]
    values: Tuple[Fraction, ...]
    slope: float
    expected: int
    tolerance: float = 0.25

    @property
    def ok(self) -> bool:
        return abs(self.slope - self.expected) <= self.tolerance

    def to_json(self) -> dict:
        return {
            "sizes": list(self.sizes),
            "dims": list(self.dims),
            "values": [str(v) for v in self.values],
            "slope": self.slope,
            "expected_slope": self.expected,
            "ok": self.ok,
        }


def vertex_cumulant_at(model_at: Callable[[int], TraceModel], pi: Premap, N: int) -> Fraction:
    return vertex_cumulant(MatrixCumulants(model_at(N), N), SetPartition.one(pi.ground), pi)


def asymptotic_order_sweep(
    model_at: Callable[[int], TraceModel], sizes: Sequence[int], dims: Sequence[int], tolerance: float = 0.25
) -> OrderSweep:
    """K_{r_1..r_m} across N with the log-log slope, expected to be 2 - 2m."""
    pi = tau_premap(sizes)
    values = tuple(vertex_cumulant_at(model_at, pi, N) for N in dims)
    return OrderSweep(tuple(sizes), tuple(dims), values, fit_slope(dims, values), 2 - 2 * len(sizes), tolerance)


@dataclass
class LimitReport:
    p: int
    q: int
    dims: Tuple[int, ...]
    scaled: Tuple[Fraction, ...]
    extrapolated: Fraction
    expected: Fraction
    tolerance: float = 0.02

    @property
    def relative_error(self) -> float:
        if self.expected == 0:
            return abs(float(self.extrapolated))
        return abs(float((self.extrapolated - self.expected) / self.expected))

    @property
    def ok(self) -> bool:
        return self.relative_error <= self.tolerance

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "dims": list(self.dims),
            "scaled": [float(v) for v in self.scaled],
            "extrapolated": float(self.extrapolated),
            "expected": str(self.expected),
            "relative_error": self.relative_error,
            "ok": self.ok,
        }


def two_vertex_premap(p: int, q: int, inverse: bool = True) -> Premap:
    tau = tau_shape(p, q)
    return Premap.from_permutation(tau.inverse() if inverse else tau)


def letter_word(indices: Sequence[int], prefix: str = "x") -> Word:
    """Signed indices as cumulant-engine letters: k -> x_k, -k -> x_k^t."""
    return tuple(Letter(f"{prefix}{abs(k)}", prefix, k < 0) for k in indices)


class BlockTraceOracle(MomentOracle):
    """phi1 = normalized trace of the product of small matrices named by letter symbol; phi2 = 0."""

    def __init__(self, matrices: Mapping[str, Matrix]):
        self.matrices = {k: as_matrix(m) for k, m in matrices.items()}
        self.block = len(next(iter(self.matrices.values())))

    def alpha1(self, word: Word) -> Fraction:
        prod = mat_identity(self.block)
        for x in word:
            m = self.matrices[x.symbol]
            prod = mat_mul(prod, mat_t(m) if x.transposed else m)
        return mat_trace(prod) / self.block

    def alpha2(self, w1: Word, w2: Word) -> Fraction:
        return Fraction(0)


class ExpandedOracle(MomentOracle):
    """Moments of letters that are sums of other letters, expanded multilinearly."""

    def __init__(self, base: MomentOracle, parts: Mapping[str, Sequence[Letter]]):
        self.base = base
        self.parts = {k: list(v) for k, v in parts.items()}

    def _expand(self, word: Word) -> Iterable[Word]:
        options = [[p.t() if x.transposed else p for p in self.parts[x.symbol]] for x in word]
        return (tuple(pick) for pick in itertools.product(*options))

    def alpha1(self, word: Word) -> Fraction:
        if not word:
            return Fraction(1)
        return sum((self.base.alpha1(w) for w in self._expand(word)), Fraction(0))

    def alpha2(self, w1: Word, w2: Word) -> Fraction:
        if not w1 or not w2:
            return Fraction(0)
        total = Fraction(0)
        for a in self._expand(w1):
            for b in self._expand(w2):
                total += self.base.alpha2(a, b)
        return total


def limit_oracle(model) -> MomentOracle:
    """Limit distribution of a block-repeated model, letters named x1, x2, ...

    Deterministic parts a_k and conjugated parts b_k become two families that
    are real second-order free in the limit, each with phi2 = 0. A model whose
    letters are all of one kind is a single family.
    """
    if isinstance(model, HaarConjugatedModel):
        flags = {bool(model.conjugated.get(k, False)) for k in model.matrices}
        if len(flags) == 1:
            return BlockTraceOracle({f"x{k}": m for k, m in model.matrices.items()})
        det = {k: m for k, m in model.matrices.items() if not model.conjugated.get(k, False)}
        conj = {k: m for k, m in model.matrices.items() if model.conjugated.get(k, False)}
        return _free_limit(det, conj)
    if isinstance(model, SumModel):
        return _free_limit(model.deterministic, model.conjugated_parts)
    raise TypeError("limit distribution known only for block-repeated models")


def _free_limit(det: Mapping[int, Matrix], conj: Mapping[int, Matrix]) -> MomentOracle:
    """x_k = a_k + b_k with the a's and b's two free families, each with phi2 = 0."""
    from .cumulants import FreeProductOracle

    a = BlockTraceOracle({f"a{k}": m for k, m in det.items()})
    b = BlockTraceOracle({f"b{k}": m for k, m in conj.items()})
    free = FreeProductOracle({"a": a, "b": b})
    parts = {}
    for k in set(det) | set(conj):
        parts[f"x{k}"] = [Letter(f"{f}{k}", f) for f, src in (("a", det), ("b", conj)) if k in src]
    return ExpandedOracle(free, parts)


def second_order_limit(
    model_at: Callable[[int], TraceModel],
    oracle: MomentOracle,
    p: int,
    q: int,
    dims: Sequence[int],
    inverse: bool = True,
    tolerance: float = 0.02,
) -> LimitReport:
    """Richardson-extrapolated N^2 K on the two-vertex premap against kappa_{p,q} of the limit oracle."""
    pi = two_vertex_premap(p, q, inverse)
    scaled = tuple(Fraction(N) ** 2 * vertex_cumulant_at(model_at, pi, N) for N in dims)
    extrapolated = richardson(dims, scaled)
    xs = letter_word(range(1, p + 1))
    ys = letter_word(range(p + 1, p + q + 1))
    expected = kappa_pq(oracle, xs, ys)
    return LimitReport(p, q, tuple(dims), scaled, extrapolated, expected, tolerance)


# Limit cumulants over PPM'


def ppm_term(kappa1, kappa2, pair: PpmPair, use_inverse: bool = True) -> Fraction:
    """kappa_(U, pi^-1): kappa1 on blocks of U holding one cycle pair, kappa2 on blocks holding two.

    Words are read from the face cycles of pi^-1, or of pi when use_inverse is False.
    """
    src = pair.premap.inverse() if use_inverse else pair.premap
    faces = src.fd().cycles()
    value = Fraction(1)
    for block in pair.partition.blocks:
        inside = [c for c in faces if abs(c[0]) in block]
        if len(inside) == 1:
            value *= kappa1(letter_word(inside[0]))
        elif len(inside) == 2:
            value *= kappa2(letter_word(inside[0]), letter_word(inside[1]))
        else:
            raise ValueError("PPM' block with more than two cycles")
        if value == 0:
            break
    return value


def limit_moment_from_ppm(kappa1, kappa2, p: int, q: int, use_inverse: bool = True) -> Fraction:
    """Second-order moment as the sum of ppm_term over PPM'(tau_{p,q})."""
    tau = tau_shape(p, q)
    total = Fraction(0)
    for m in enumerate_pm_nc(tau):
        for u in coarsenings(m.blocks()):
            pair = PpmPair(u, m)
            if is_ppm_prime(pair, tau):
                total += ppm_term(kappa1, kappa2, pair, use_inverse)
    return total
