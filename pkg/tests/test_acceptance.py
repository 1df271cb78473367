"""Acceptance checks, one per criterion.

Each test records a PASS/FAIL line that the terminal summary prints after the
run. Running this file directly executes every check and prints the same lines.
"""

import json
import sys
import time
from fractions import Fraction

import pytest

from annular_cumulants.combinatorics import SetPartition, all_permutations, coarsenings, set_partitions, tau_shape
from annular_cumulants.cumulants import (
    CentredOracle,
    CumulantsFromMoments,
    MomentsFromCumulants,
    RandomCumulants,
    RandomOracle,
    forward_freeness_check,
    free_cumulant,
    letter,
    moment_from_free_cumulants,
    spoke_formula,
    spoke_formula_corrected,
)
from annular_cumulants.matrix_cumulants import (
    HaarConjugatedModel,
    MatrixCumulants,
    RandomMatrixCumulants,
    SumModel,
    asymptotic_order_sweep,
    limit_oracle,
    log_generating_check,
    matrix_from_vertex,
    parse_fd,
    second_order_limit,
    vertex_cumulant,
    vertex_cumulants,
)
from annular_cumulants.mc_lab import BatteryConfig, validate_against_exact
from annular_cumulants.noncrossing import (
    AnnulusShape,
    is_noncrossing_chi,
    is_noncrossing_conditions,
    noncrossing_perms,
)
from annular_cumulants.premaps import all_premaps
from annular_cumulants.sd_poset import (
    discrepancies,
    f_bruteforce,
    f_coefficient,
    is_hatted_degenerate,
    mobius_closed_corrected,
)
from annular_cumulants.weingarten import gamma, wg_cumulant_pair

RESULTS = []


def record(number, title, ok, detail):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


MATS_A = {1: [[2, 1], [0, 1]], 2: [[2, 1], [1, -1]], 3: [[0, 1], [-1, 3]], 4: [[1, -1], [2, 1]]}
MATS_B = {1: [[1, 0], [1, 2]], 2: [[0, 2], [1, 1]], 3: [[1, 1], [-2, 0]], 4: [[3, 1], [0, -1]]}


def exact_fixtures():
    return {
        "haar": HaarConjugatedModel(MATS_A, {k: True for k in MATS_A}, 8),
        "sum": SumModel(MATS_A, MATS_B, 8),
    }


def test_criterion_01_dual_characterization():
    start = time.time()
    checks = mismatches = 0
    for n in range(2, 8):
        shapes = [tau_shape(n)] + [tau_shape(p, n - p) for p in range(1, n)]
        perms = list(all_permutations(n))
        for tau in shapes:
            for pi in perms:
                checks += 1
                if is_noncrossing_chi(pi, tau) != is_noncrossing_conditions(pi, tau):
                    mismatches += 1
    elapsed = time.time() - start
    ok = mismatches == 0 and elapsed < 60
    record(1, "dual characterization", ok, f"{checks} checks, {mismatches} mismatches, {elapsed:.1f}s (limit 60s)")


def test_criterion_02_catalan_counts():
    expected = [1, 2, 5, 14, 42, 132, 429, 1430]
    got = [len(noncrossing_perms(n)) for n in range(1, 9)]
    record(2, "Catalan counts", got == expected, f"{got}")


def test_criterion_03_f_coefficients():
    start = time.time()
    bad = [(r, s) for r in range(1, 8) for s in range(1, 9 - r) if f_coefficient(r, s) != f_bruteforce(r, s)]
    elapsed = time.time() - start
    examples = f_coefficient(1, 1) == 1 and f_coefficient(2, 1) == -4
    ok = not bad and examples and elapsed < 10
    record(3, "f coefficients", ok, f"mismatches {bad}, f(1,1)={f_coefficient(1, 1)}, f(2,1)={f_coefficient(2, 1)}, {elapsed:.1f}s")


def test_criterion_04_mobius_consistency():
    shapes = [(p, q) for p in range(1, 6) for q in range(p, 6) if p + q <= 6]
    total = degenerate = corrected = 0
    sample = None
    for p, q in shapes:
        found = discrepancies(AnnulusShape(p, q))
        total += len(found)
        degenerate += sum(map(is_hatted_degenerate, found))
        corrected += len(discrepancies(AnnulusShape(p, q), mobius_closed_corrected))
        for d in found:
            if sample is None and not is_hatted_degenerate(d):
                sample = f"{d.lower.label()} < {d.upper.label()} recursive {d.recursive} closed {d.closed}"
    ok = total == degenerate
    detail = (
        f"{total} closed-form disagreements, {degenerate} with equal permutations, "
        f"{total - degenerate} outside that class (e.g. {sample}); "
        f"closed form with the Kreweras Catalan term restored: {corrected} disagreements"
    )
    record(4, "Mobius consistency", ok, detail)


SHAPES_5 = [(p, q) for p in range(1, 5) for q in range(1, 5) if p + q <= 5]


def _words(p, q):
    return tuple(letter(f"x{i}") for i in range(1, p + 1)), tuple(letter(f"y{i}") for i in range(1, q + 1))


def test_criterion_05_moment_cumulant_inversion():
    seeds = 100
    bad = 0
    checks = 0
    for seed in range(seeds):
        o = RandomOracle(f"acc{seed}")
        table = CumulantsFromMoments(o)
        back = MomentsFromCumulants(table)
        for n in range(1, 6):
            word = tuple(letter(f"x{i}") for i in range(n))
            checks += 1
            bad += moment_from_free_cumulants(table, word) != o.alpha1(word)
        for p, q in SHAPES_5:
            xs, ys = _words(p, q)
            checks += 1
            bad += back.alpha2(xs, ys) != o.alpha2(xs, ys)
        c = RandomCumulants(f"acc{seed}")
        again = CumulantsFromMoments(MomentsFromCumulants(c))
        for n in range(1, 6):
            word = tuple(letter(f"x{i}") for i in range(n))
            checks += 1
            bad += free_cumulant(MomentsFromCumulants(c), word) != c.kappa1(word)
        for p, q in SHAPES_5:
            xs, ys = _words(p, q)
            checks += 1
            bad += again.kappa2(xs, ys) != c.kappa2(xs, ys)
    record(5, "moment-cumulant inversion", bad == 0, f"{seeds} moment and {seeds} cumulant fixtures, {checks} exact roundtrips, {bad} failures")


FAMILIES = {"a": [letter("a1"), letter("a2")], "b": [letter("b1")]}


def test_criterion_06_freeness_spoke_formula():
    literal = forward_freeness_check(0, FAMILIES, 3, 3, spoke=spoke_formula)
    corrected = forward_freeness_check(0, FAMILIES, 3, 3, spoke=spoke_formula_corrected)
    unequal = [v for v in literal.violations if len(v["xs"].split()) != len(v["ys"].split())]
    equal = len(literal.violations) - len(unequal)
    example = literal.violations[0] if literal.violations else None
    detail = (
        f"{literal.checked} centred alternating pairs, {len(literal.violations)} disagree with the spoke sum as stated "
        f"({equal} with p=q, {len(unequal)} with p!=q); first {json.dumps(example)}; "
        f"with y_j^t in the second sum and reversed indexing in the first: {len(corrected.violations)} disagree"
    )
    record(6, "freeness spoke formula", literal.ok, detail)


def _partition_pairs(n):
    for u in set_partitions(list(range(1, n + 1))):
        for v in coarsenings(u):
            yield u, v


def test_criterion_07_weingarten_asymptotics():
    start = time.time()
    dims = (40, 80, 160)
    ratios, exact_pairs, bad = [], 0, []
    for n in (1, 2, 3):
        for u, v in _partition_pairs(n):
            g = gamma(u, v)
            scale = 2 * (len(u) - len(v))
            devs = [abs(wg_cumulant_pair(u, v, N) * Fraction(N) ** scale - g) for N in dims]
            if all(d == 0 for d in devs):
                exact_pairs += 1
                continue
            rs = [float(devs[1] / devs[0]), float(devs[2] / devs[1])]
            ratios.extend(rs)
            if not all(0.4 <= r <= 0.6 for r in rs):
                bad.append((str(u), str(v), rs))
    S = SetPartition.from_json
    coeff30 = gamma(S("[[1,2,3],[4]]"), S("[[1,2,3,4]]"))
    coeff_pair = gamma(S("[[1,2]]"), S("[[1,2]]"))
    elapsed = time.time() - start
    ok = not bad and coeff30 == 30 and coeff_pair == -1 and elapsed < 120
    detail = (
        f"ratios in [{min(ratios):.3f}, {max(ratios):.3f}] over {len(ratios) // 2} pairs, "
        f"{exact_pairs} pairs exact at every N (no deviation to compare), out of range {bad}; "
        f"gamma=30 and gamma=-1 reproduced: {coeff30 == 30 and coeff_pair == -1}; {elapsed:.1f}s"
    )
    record(7, "Weingarten asymptotics", ok, detail)


def test_criterion_08_vertex_structure():
    problems = []
    c = RandomMatrixCumulants("acceptance")
    inverse_checks = 0
    for n in range(1, 5):
        for pi in all_premaps(range(1, n + 1)):
            inverse_checks += 1
            if matrix_from_vertex(vertex_cumulants(c, pi)) != c(pi):
                problems.append(f"inverse {pi}")
    log_checks = 0
    for pi in list(all_premaps(range(1, 5))) + [parse_fd("(1)(2)(3)(4)(5)"), parse_fd("(1,-2)(3)(4)(5)"), parse_fd("(1)(2,3)(4)(5)")]:
        log_checks += 1
        if not log_generating_check(c, pi).ok:
            problems.append(f"log {pi}")
    split = RandomMatrixCumulants("acceptance", split={1, 3})
    mixed = 0
    for pi in all_premaps(range(1, 5)):
        if len({k in {1, 3} for k in pi.ground}) == 2:
            mixed += 1
            if vertex_cumulant(split, SetPartition.one(pi.ground), pi) != 0:
                problems.append(f"factorizing {pi}")
    haar = HaarConjugatedModel(MATS_A, {1: False, 2: True, 3: False, 4: True}, 8)
    hc = MatrixCumulants(haar, 8)
    for n in range(2, 4):
        for pi in all_premaps(range(1, n + 1)):
            if len({k % 2 for k in pi.ground}) == 2:
                mixed += 1
                if vertex_cumulant(hc, SetPartition.one(pi.ground), pi) != 0:
                    problems.append(f"haar {pi}")
    detail = f"{inverse_checks} inverse checks, {log_checks} log-generating checks, {mixed} mixed cumulants, problems {problems[:5]}"
    record(8, "vertex cumulant structure", not problems, detail)


def test_criterion_09_order_bounds():
    dims = (8, 16, 32, 64)
    parts, ok = [], True
    for name, model in exact_fixtures().items():
        for sizes in ((2,), (1, 1), (2, 1, 1)):
            sweep = asymptotic_order_sweep(model.at, sizes, dims)
            ok = ok and sweep.ok
            parts.append(f"{name} {sizes} slope {sweep.slope:.3f} vs {sweep.expected}")
    record(9, "order bounds", ok, "; ".join(parts))


def test_criterion_10_two_vertex_limit():
    dims = (8, 16, 32, 64)
    parts, ok = [], True
    for name, model in exact_fixtures().items():
        oracle = limit_oracle(model)
        for p, q in ((1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1)):
            rep = second_order_limit(model.at, oracle, p, q, dims)
            ok = ok and rep.ok
            parts.append(f"{name} ({p},{q}) {float(rep.extrapolated):.5f} vs {rep.expected} err {rep.relative_error:.2%}")
    record(10, "two-vertex limit", ok, "; ".join(parts))


def test_criterion_11_monte_carlo_battery():
    parts, ok = [], True
    for battery in ("haar-basic", "two-vertex"):
        report = validate_against_exact(BatteryConfig(battery, N=8, samples=100_000, seed=0))
        ok = ok and report.ok
        parts.append(f"{battery} max |z| {report.max_abs_z:.2f} over {len(report.checks)} checks")
    small = BatteryConfig("haar-basic", N=8, samples=20_000, seed=3)
    first = json.dumps(validate_against_exact(small).to_json())
    second = json.dumps(validate_against_exact(small).to_json())
    threaded = json.dumps(validate_against_exact(BatteryConfig("haar-basic", N=8, samples=20_000, seed=3, jobs=4)).to_json())
    same = first == second == threaded
    ok = ok and same
    parts.append(f"fixed seed bit-identical (also across 1 and 4 workers): {same}")
    record(11, "Monte Carlo battery", ok, "; ".join(parts))


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
