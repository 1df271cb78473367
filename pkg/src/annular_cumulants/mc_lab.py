"""Monte Carlo cross-checks of the exact trace models.

Haar orthogonal matrices come from QR of a Gaussian matrix with the signs of
diag(R) folded into Q. Each chunk of samples draws from its own child of the
master seed sequence, so results do not depend on how chunks are scheduled,
and chunk statistics are merged in chunk order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .combinatorics import SetPartition, interval
from .matrix_cumulants import (
    HaarConjugatedModel,
    MatrixCumulants,
    SignedWord,
    SumModel,
    TraceModel,
    _premaps_on,
    canonical_multiset,
    multiset_str,
    premap_words,
    two_vertex_premap,
    vertex_cumulant,
)
from .premaps import Premap
from .weingarten import pairings, wg_context

Z_LIMIT = 4.0
DEFAULT_CHUNK = 10_000


def haar_from_gaussian(g: np.ndarray) -> np.ndarray:
    """Q D where G = QR and D = sign(diag R); works on stacks of square matrices."""
    q, r = np.linalg.qr(g)
    d = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    d[d == 0] = 1.0
    return q * d[..., None, :]


@dataclass
class HaarSampler:
    N: int
    seed: int = 0
    counter: int = 0

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("N must be at least 1")

    def rng(self, index: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(index,)))

    def draw_chunk(self, index: int, count: int) -> np.ndarray:
        g = self.rng(index).standard_normal((count, self.N, self.N))
        return haar_from_gaussian(g)

    def draw(self, count: int = 1) -> np.ndarray:
        out = self.draw_chunk(self.counter, count)
        self.counter += 1
        return out


def sample_haar(N: int, seed: int = 0) -> np.ndarray:
    return HaarSampler(N, seed).draw(1)[0]


def orthogonality_defect(q: np.ndarray) -> float:
    """Largest Frobenius norm of Q Q^T - I over a stack."""
    eye = np.eye(q.shape[-1])
    diff = q @ np.swapaxes(q, -1, -2) - eye
    return float(np.max(np.linalg.norm(diff, axis=(-2, -1))))


# Ensembles


@dataclass
class MatrixEnsemble:
    """X_k = D_k + O C_k O^T with D_k, C_k fixed N x N (either may be absent) and O Haar."""

    N: int
    deterministic: Dict[int, np.ndarray]
    conjugated: Dict[int, np.ndarray]

    @classmethod
    def from_model(cls, model: TraceModel) -> "MatrixEnsemble":
        if isinstance(model, SumModel):
            det = {k: _expand(m, model.N, model.block) for k, m in model.deterministic.items()}
            conj = {k: _expand(m, model.N, model.block) for k, m in model.conjugated_parts.items()}
            return cls(model.N, det, conj)
        if isinstance(model, HaarConjugatedModel):
            det, conj = {}, {}
            for k, m in model.matrices.items():
                target = conj if model.conjugated.get(k, False) else det
                target[k] = _expand(m, model.N, model.block)
            return cls(model.N, det, conj)
        raise TypeError(f"no sampler for {type(model).__name__}")

    @property
    def letters(self) -> List[int]:
        return sorted(set(self.deterministic) | set(self.conjugated))

    @property
    def random(self) -> bool:
        return bool(self.conjugated)

    def realize(self, o: np.ndarray) -> Dict[int, np.ndarray]:
        out = {}
        for k in self.letters:
            x = self.deterministic.get(k)
            if k in self.conjugated:
                c = o @ self.conjugated[k] @ np.swapaxes(o, -1, -2)
                x = c if x is None else x + c
            out[k] = x
        return out


def _expand(m, N: int, block: int) -> np.ndarray:
    small = np.array([[float(x) for x in row] for row in m])
    return np.kron(np.eye(N // block), small)


def word_traces(x: Mapping[int, np.ndarray], words: Sequence[SignedWord], N: int) -> Dict[SignedWord, np.ndarray]:
    """Normalized traces of each word, one value per sample in the stack."""
    out = {}
    for w in words:
        if w in out:
            continue
        prod = None
        for letter in w:
            m = x[abs(letter)]
            if letter < 0:
                m = np.swapaxes(m, -1, -2)
            prod = m if prod is None else prod @ m
        out[w] = np.trace(prod, axis1=-2, axis2=-1) / N
    return out


# Statistics


@dataclass
class TraceStatistics:
    """Running mean and co-moment matrix of a vector of observables."""

    labels: List[str]
    count: int = 0
    mean: np.ndarray = None
    comoment: np.ndarray = None

    def __post_init__(self):
        k = len(self.labels)
        if self.mean is None:
            self.mean = np.zeros(k)
        if self.comoment is None:
            self.comoment = np.zeros((k, k))

    @classmethod
    def from_values(cls, labels: Sequence[str], values: np.ndarray) -> "TraceStatistics":
        values = np.asarray(values, dtype=float).reshape(len(values), len(labels))
        mean = values.mean(axis=0)
        centred = values - mean
        return cls(list(labels), len(values), mean, centred.T @ centred)

    def merge(self, other: "TraceStatistics") -> "TraceStatistics":
        if other.count == 0:
            return self.copy()
        if self.count == 0:
            return other.copy()
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * (other.count / n)
        comoment = self.comoment + other.comoment + np.outer(delta, delta) * (self.count * other.count / n)
        return TraceStatistics(list(self.labels), n, mean, comoment)

    def copy(self) -> "TraceStatistics":
        return TraceStatistics(list(self.labels), self.count, self.mean.copy(), self.comoment.copy())

    @property
    def covariance(self) -> np.ndarray:
        if self.count < 2:
            return np.full_like(self.comoment, np.nan)
        return self.comoment / (self.count - 1)

    @property
    def stderr(self) -> np.ndarray:
        return np.sqrt(np.maximum(np.diag(self.covariance), 0.0) / self.count)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def to_json(self) -> dict:
        return {
            "count": self.count,
            "labels": self.labels,
            "mean": self.mean.tolist(),
            "covariance": self.covariance.tolist(),
            "stderr": self.stderr.tolist(),
        }


Observable = Tuple[SignedWord, ...]


def observable_label(obs: Observable) -> str:
    return multiset_str(obs)


def _chunk_stats(ensemble, observables, sampler, index, count) -> TraceStatistics:
    labels = [observable_label(o) for o in observables]
    if ensemble.random:
        x = ensemble.realize(sampler.draw_chunk(index, count))
    else:
        x = {k: np.broadcast_to(v, (count,) + v.shape) for k, v in ensemble.realize(None).items()}
    traces = word_traces(x, [w for o in observables for w in o], ensemble.N)
    values = np.ones((count, len(observables)))
    for j, obs in enumerate(observables):
        for w in obs:
            values[:, j] *= traces[w]
    return TraceStatistics.from_values(labels, values)


def chunk_statistics(
    ensemble: MatrixEnsemble,
    observables: Sequence[Observable],
    samples: int,
    seed: int = 0,
    chunk: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> List[TraceStatistics]:
    """Statistics of each chunk of samples; chunk i always uses child i of the seed."""
    observables = [canonical_multiset(o) for o in observables]
    sampler = HaarSampler(ensemble.N, seed)
    sizes = [min(chunk, samples - start) for start in range(0, samples, chunk)]
    tasks = list(enumerate(sizes))
    run = lambda t: _chunk_stats(ensemble, observables, sampler, t[0], t[1])
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run, tasks))
    return [run(t) for t in tasks]


def merge_all(parts: Sequence[TraceStatistics]) -> TraceStatistics:
    total = parts[0].copy()
    for p in parts[1:]:
        total = total.merge(p)
    return total


def estimate_traces(
    ensemble: MatrixEnsemble,
    observables: Sequence[Observable],
    samples: int,
    seed: int = 0,
    chunk: int = DEFAULT_CHUNK,
    jobs: int = 1,
) -> TraceStatistics:
    """Empirical E(tr w_1 ... tr w_m) for each observable (w_1, ..., w_m)."""
    return merge_all(chunk_statistics(ensemble, observables, samples, seed, chunk, jobs))


# Plug-in estimates


class EmpiricalTraceModel(TraceModel):
    """Trace model reading float moments from a table keyed by observable label."""

    def __init__(self, values: Mapping[str, float]):
        self.values = values

    def moment(self, words):
        if not words:
            return Fraction(1)
        return self.values[multiset_str(canonical_multiset(words))]


def plug_in_observables(pi: Premap, u: SetPartition) -> List[Observable]:
    """Every trace product that K_(U, pi) can read, whether or not it is zero."""
    seen = {}
    for v in interval(pi.blocks(), u):
        for block in v.blocks:
            for sigma in _premaps_on(pi.restrict(block).ground):
                key = canonical_multiset(premap_words(sigma))
                seen[multiset_str(key)] = key
    return [seen[k] for k in sorted(seen)]


def jackknife(fn: Callable[[Dict[str, float]], float], parts: Sequence[TraceStatistics]) -> Tuple[float, float]:
    """Bias-corrected estimate and standard error of fn(means) by delete-one-chunk jackknife."""
    total = merge_all(parts)
    full = fn(dict(zip(total.labels, total.mean)))
    g = len(parts)
    if g < 2:
        return full, float("nan")
    leave = []
    for i in range(g):
        rest = merge_all([p for j, p in enumerate(parts) if j != i])
        leave.append(fn(dict(zip(rest.labels, rest.mean))))
    leave = np.array(leave)
    estimate = g * full - (g - 1) * leave.mean()
    se = math.sqrt((g - 1) / g * float(np.sum((leave - leave.mean()) ** 2)))
    return float(estimate), se


# Batteries


@dataclass
class Check:
    name: str
    estimate: float
    stderr: float
    exact: float

    @property
    def z(self) -> float:
        diff = self.estimate - self.exact
        if self.stderr == 0 or math.isnan(self.stderr):
            return 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(self.exact)) else math.inf
        return diff / self.stderr

    @property
    def ok(self) -> bool:
        return abs(self.z) < Z_LIMIT

    def to_json(self) -> dict:
        z = self.z
        return {
            "name": self.name,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "exact": self.exact,
            "z": z if math.isfinite(z) else str(z),
            "ok": self.ok,
        }


@dataclass
class ValidationReport:
    battery: str
    N: int
    samples: int
    seed: int
    checks: List[Check] = field(default_factory=list)
    orthogonality: Optional[float] = None

    @property
    def ok(self) -> bool:
        orth = self.orthogonality is None or self.orthogonality < 1e-10
        return orth and all(c.ok for c in self.checks)

    @property
    def max_abs_z(self) -> float:
        return max((abs(c.z) for c in self.checks), default=0.0)

    def to_json(self) -> dict:
        return {
            "battery": self.battery,
            "N": self.N,
            "samples": self.samples,
            "seed": self.seed,
            "orthogonality_defect": self.orthogonality,
            "max_abs_z": self.max_abs_z,
            "ok": self.ok,
            "checks": [c.to_json() for c in self.checks],
        }


@dataclass
class BatteryConfig:
    battery: str = "haar-basic"
    N: int = 8
    samples: int = 100_000
    seed: int = 0
    chunk: int = DEFAULT_CHUNK
    jobs: int = 1
    model: Optional[TraceModel] = None


BATTERIES = ("haar-basic", "two-vertex", "deterministic")


def battery_model(N: int) -> HaarConjugatedModel:
    """Letters 1, 3 deterministic and 2, 4 conjugated; 1 and 2 are diagonal."""
    matrices = {
        1: [[3, 0], [0, 1]],
        2: [[2, 0], [0, -1]],
        3: [[2, 1], [1, -1]],
        4: [[1, 0], [1, 2]],
    }
    return HaarConjugatedModel(matrices, {1: False, 2: True, 3: False, 4: True}, N)


def deterministic_model(N: int) -> HaarConjugatedModel:
    matrices = {1: [[3, 0], [0, 1]], 3: [[2, 1], [1, -1]]}
    return HaarConjugatedModel(matrices, {1: False, 3: False}, N)


ONE_BLOCK_WORDS = [
    ((1, 2),),
    ((1, -2),),
    ((3, 2),),
    ((3, 4),),
    ((1, 1, 2),),
    ((1, 2, 2),),
    ((3, 4, -4),),
    ((1,),),
    ((2,),),
]

TWO_BLOCK_WORDS = [
    ((1, 2, 3, 4),),
    ((1, 2, 1, 2),),
    ((1, 2, 3, -2),),
    ((1, 2), (1, 2)),
    ((1, 2), (3, 4)),
    ((3, 2), (1, -4)),
]


def _words_name(obs: Observable) -> str:
    return "E " + " ".join("tr(" + " ".join(f"X{abs(x)}" + ("^T" if x < 0 else "") for x in w) + ")" for w in obs)


def _trace_checks(model, stats_parts, observables) -> List[Check]:
    stats = merge_all(stats_parts)
    out = []
    for obs in observables:
        key = canonical_multiset(obs)
        i = stats.index(multiset_str(key))
        out.append(Check(_words_name(key), float(stats.mean[i]), float(stats.stderr[i]), float(model.moment(key))))
    return out


def _covariance_check(model, stats: TraceStatistics, word: SignedWord) -> Check:
    """N^2 cov(tr w, tr w) with a delta-method standard error."""
    N = model.N
    i = stats.index(multiset_str(canonical_multiset([word, word])))
    j = stats.index(multiset_str(canonical_multiset([word])))
    n = stats.count
    m2, m1 = stats.mean[i], stats.mean[j]
    estimate = (m2 - m1 * m1) * n / (n - 1)
    grad = np.array([1.0, -2.0 * m1])
    sub = stats.covariance[np.ix_([i, j], [i, j])]
    se = math.sqrt(max(float(grad @ sub @ grad), 0.0) / n)
    exact = model.moment([word, word]) - model.moment([word]) ** 2
    name = f"N^2 cov(tr w, tr w) for w = {_words_name((word,))[5:-1]}"
    return Check(name, N * N * float(estimate), N * N * se, float(N * N * exact))


def _mixed_vertex_check(model, ensemble, config) -> Check:
    """K for the two-vertex premap with vertices (X1 X2) and (X3 X4), estimated by jackknife."""
    pi = two_vertex_premap(2, 2, inverse=True)
    top = SetPartition.one(pi.ground)
    exact = vertex_cumulant(MatrixCumulants(model, model.N), top, pi)
    observables = plug_in_observables(pi, top)
    parts = chunk_statistics(ensemble, observables, config.samples, config.seed + 1, _jack_chunk(config), config.jobs)

    def fn(values):
        return float(vertex_cumulant(MatrixCumulants(EmpiricalTraceModel(values), model.N), top, pi))

    estimate, se = jackknife(fn, parts)
    return Check("mixed vertex cumulant K for faces (X1 X2)(X3 X4) inverted", estimate, se, float(exact))


def _jack_chunk(config: BatteryConfig) -> int:
    return max(config.samples // 20, 1)


def _haar_entry_checks(config: BatteryConfig) -> Tuple[List[Check], float]:
    sampler = HaarSampler(config.N, config.seed + 2)
    sizes = [min(config.chunk, config.samples - s) for s in range(0, config.samples, config.chunk)]
    labels = ["q11^2", "sign det"]
    parts, defect = [], 0.0
    for idx, count in enumerate(sizes):
        q = sampler.draw_chunk(idx, count)
        defect = max(defect, orthogonality_defect(q))
        values = np.stack([q[:, 0, 0] ** 2, np.sign(np.linalg.det(q))], axis=1)
        parts.append(TraceStatistics.from_values(labels, values))
    stats = merge_all(parts)
    ctx = wg_context(1, config.N)
    pair = next(iter(pairings([0, 1])))
    exact_q11 = float(ctx.wg_std(pair, pair))
    checks = [
        Check("E Q11^2", float(stats.mean[0]), float(stats.stderr[0]), exact_q11),
        Check("E sign det Q", float(stats.mean[1]), float(stats.stderr[1]), 0.0),
    ]
    return checks, defect


def validate_against_exact(config: BatteryConfig) -> ValidationReport:
    """Empirical against exact values for a named battery, with z-scores."""
    if config.battery not in BATTERIES:
        raise ValueError(f"unknown battery {config.battery!r}; choose from {', '.join(BATTERIES)}")
    report = ValidationReport(config.battery, config.N, config.samples, config.seed)
    if config.battery == "deterministic":
        model = config.model or deterministic_model(config.N)
        observables = [((1,),), ((1, 3),), ((1, 3, 3),), ((1,), (3, 3))]
    else:
        model = config.model or battery_model(config.N)
        observables = ONE_BLOCK_WORDS if config.battery == "haar-basic" else TWO_BLOCK_WORDS
    ensemble = MatrixEnsemble.from_model(model)
    if config.battery == "two-vertex":
        word = canonical_multiset([(1, 2)])[0]
        observables = list(dict.fromkeys(canonical_multiset(o) for o in list(observables) + [(word,), (word, word)]))
    parts = chunk_statistics(ensemble, observables, config.samples, config.seed, config.chunk, config.jobs)
    report.checks.extend(_trace_checks(model, parts, observables))
    if config.battery == "haar-basic":
        checks, defect = _haar_entry_checks(config)
        report.checks.extend(checks)
        report.orthogonality = defect
    elif config.battery == "two-vertex":
        report.checks.append(_covariance_check(model, merge_all(parts), word))
        report.checks.append(_mixed_vertex_check(model, ensemble, config))
    return report


def covariance_sweep(dims: Sequence[int], samples: int, seed: int = 0, jobs: int = 1) -> List[Check]:
    """N^2 cov(tr(X1 X2), tr(X1 X2)) against the exact value at each N."""
    out = []
    word = canonical_multiset([(1, 2)])[0]
    for N in dims:
        model = battery_model(N)
        stats = estimate_traces(MatrixEnsemble.from_model(model), [(word,), (word, word)], samples, seed, jobs=jobs)
        check = _covariance_check(model, stats, word)
        check.name = f"N={N}: " + check.name
        out.append(check)
    return out
