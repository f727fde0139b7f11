import itertools
from fractions import Fraction
from math import factorial

import pytest

from secquery import (
    BudgetExceeded,
    EnumerationBudget,
    NumericMode,
    ProblemSpec,
    classical_threshold,
    compute_tables,
    exact_success_probability,
    exhaustive_optimal,
    extract_thresholds,
    random_exact_model,
    symmetric_binary_model,
    validate_model,
    verify_lemma1,
    verify_lemma2,
)

RATIONAL = NumericMode.EXACT_RATIONAL

INFALLIBLE = validate_model(2, (1, 0), (0, 1))
UNIFORM = validate_model(2, (Fraction(1, 2), Fraction(1, 2)), (Fraction(1, 2), Fraction(1, 2)))


def solved(n, K, model):
    tables = compute_tables(ProblemSpec(n, K, model), RATIONAL)
    return tables, extract_thresholds(tables)


def test_exact_success_single_candidate():
    for K, model in ((0, UNIFORM), (1, INFALLIBLE)):
        tables, ts = solved(1, K, model)
        assert exact_success_probability(ProblemSpec(1, K, model), ts) == 1


def test_exact_success_matches_classical_k0():
    tables, ts = solved(4, 0, UNIFORM)
    value = exact_success_probability(ProblemSpec(4, 0, UNIFORM), ts)
    assert value == classical_threshold(4, RATIONAL)[1] == tables.a(0, 0)


def test_exact_success_symmetric_08():
    model = symmetric_binary_model(Fraction(4, 5))
    spec = ProblemSpec(5, 2, model)
    tables, ts = solved(5, 2, model)
    assert exact_success_probability(spec, ts) == tables.a(0, 0)


def test_exact_success_budget():
    model = symmetric_binary_model(Fraction(4, 5))
    with pytest.raises(BudgetExceeded):
        exact_success_probability(
            ProblemSpec(12, 0, model),
            extract_thresholds(compute_tables(ProblemSpec(12, 0, model), RATIONAL)),
        )


def test_exhaustive_matches_classical_n3():
    assert exhaustive_optimal(ProblemSpec(3, 0, UNIFORM)) == classical_threshold(3, RATIONAL)[1]


def test_exhaustive_infallible_n4_k1():
    spec = ProblemSpec(4, 1, INFALLIBLE)
    tables, _ = solved(4, 1, INFALLIBLE)
    assert exhaustive_optimal(spec) == tables.a(0, 0)


def test_exhaustive_uniform_collapses_to_classical():
    spec = ProblemSpec(4, 1, UNIFORM)
    assert exhaustive_optimal(spec) == classical_threshold(4, RATIONAL)[1]


def test_exhaustive_matches_classical_n5_k0():
    assert exhaustive_optimal(ProblemSpec(5, 0, UNIFORM)) == classical_threshold(5, RATIONAL)[1]


def test_exhaustive_budget_guard():
    with pytest.raises(BudgetExceeded):
        exhaustive_optimal(ProblemSpec(4, 1, INFALLIBLE), EnumerationBudget(max_states=10))


def test_oracle_agreement_random_suite(rng):
    for _ in range(8):
        model = random_exact_model(rng, rng.choice([2, 3]))
        for n in (2, 4, 5):
            for K in (0, 1, min(2, n)):
                spec = ProblemSpec(n, K, model)
                tables = compute_tables(spec, RATIONAL)
                ts = extract_thresholds(tables)
                assert exact_success_probability(spec, ts) == tables.a(0, 0)


def test_exhaustive_never_below_threshold_family(rng):
    for _ in range(6):
        model = random_exact_model(rng, 2)
        spec = ProblemSpec(4, 1, model)
        tables = compute_tables(spec, RATIONAL)
        assert exhaustive_optimal(spec) == tables.a(0, 0)


def test_exhaustive_at_practical_limit(rng):
    # n=5, K=2, M=2 is the practical ceiling for the history search.
    for _ in range(3):
        model = random_exact_model(rng, 2)
        spec = ProblemSpec(5, 2, model)
        tables = compute_tables(spec, RATIONAL)
        assert exhaustive_optimal(spec) == tables.a(0, 0)


def test_perturbed_thresholds_never_improve(rng):
    from dataclasses import replace

    model = random_exact_model(rng, 2)
    spec = ProblemSpec(5, 2, model)
    tables = compute_tables(spec, RATIONAL)
    ts = extract_thresholds(tables)
    optimal = tables.a(0, 0)
    variants = []
    for delta in (-1, 1):
        v = min(max(ts.r_f + delta, 1), 5)
        variants.append(replace(ts, r_f=v))
        for j in range(2):
            r = list(ts.r)
            r[j] = min(max(r[j] + delta, 1), 5)
            variants.append(replace(ts, r=tuple(r)))
            for m in range(2):
                s = [list(row) for row in ts.s]
                s[j][m] = min(max(s[j][m] + delta, 1), 5)
                variants.append(replace(ts, s=tuple(tuple(row) for row in s)))
    for variant in variants:
        assert exact_success_probability(spec, variant) <= optimal


# -- verify_lemma1 --------------------------------------------------------------


def test_lemma1_exact_small():
    for n in (2, 3, 4):
        report = verify_lemma1(n)
        assert report.passed, [c.failures for c in report.checks]
        assert all(c.worst_deviation == 0 for c in report.checks)


def test_lemma1_prefix_instance():
    # P(z-prefix (1,2,1)) at t=3 must be 1/3! regardless of n.
    n = 5
    count = 0
    for perm in itertools.permutations(range(1, n + 1)):
        z = [1 + sum(1 for l in range(i) if perm[l] < perm[i]) for i in range(3)]
        if z == [1, 2, 1]:
            count += 1
    assert Fraction(count, factorial(n)) == Fraction(1, 6)


def test_lemma1_joint_best_earlier_instance():
    # n=5: P(value-1 at time 2 and prefix (1,1,2,2)) = 1/(3! * 5) = 1/30.
    n = 5
    count = 0
    for perm in itertools.permutations(range(1, n + 1)):
        z = [1 + sum(1 for l in range(i) if perm[l] < perm[i]) for i in range(4)]
        if z == [1, 1, 2, 2] and perm[1] == 1:
            count += 1
    assert Fraction(count, factorial(n)) == Fraction(1, 30)


def test_lemma1_budget():
    with pytest.raises(BudgetExceeded):
        verify_lemma1(12)


# -- verify_lemma2 --------------------------------------------------------------


def test_lemma2_small_models():
    for model in (INFALLIBLE, UNIFORM, symmetric_binary_model(Fraction(4, 5))):
        report = verify_lemma2(4, model)
        assert report.passed, [c.failures for c in report.checks]


def test_lemma2_infallible_posterior_is_certain():
    # After a level-1 response from the infallible expert the posterior is 1.
    n, tk = 4, 2
    num = Fraction(0)
    den = Fraction(0)
    for perm in itertools.permutations(range(1, n + 1)):
        z2 = 1 + (1 if perm[0] < perm[1] else 0)
        if z2 != 1:
            continue
        best_at_tk = perm[tk - 1] == 1
        w = Fraction(1, factorial(n)) * (1 if best_at_tk else 0)  # p(1)=1, q(1)=0
        # condition on rank prefix (1, 1)
        if perm[tk - 1] == min(perm[:tk]):
            den += w
            if best_at_tk:
                num += w
    assert num / den == 1


def test_lemma2_posterior_instance_8_11():
    # symmetric p=4/5, query at t=2 of n=5 with response level 1:
    # posterior = (0.8*2)/(0.8*2 + 0.2*3) = 8/11, confirmed by enumeration.
    model = symmetric_binary_model(Fraction(4, 5))
    n, tk = 5, 2
    expected = Fraction(Fraction(4, 5) * 2, Fraction(4, 5) * 2 + Fraction(1, 5) * 3)
    assert expected == Fraction(8, 11)
    num = Fraction(0)
    den = Fraction(0)
    for perm in itertools.permutations(range(1, n + 1)):
        if perm[1] != min(perm[:2]):  # need z_2 = 1
            continue
        is_best = perm[1] == 1
        w = Fraction(1, factorial(n)) * (model.p[0] if is_best else model.q[0])
        den += w
        if is_best:
            num += w
    assert num / den == expected


def test_lemma2_uniform_next_record_is_uniform():
    # p = q kills the correction term: P(z_t = 1 | ...) = 1/t everywhere.
    report = verify_lemma2(4, UNIFORM)
    assert report.passed
    n, tk, t = 4, 1, 3
    num = Fraction(0)
    den = Fraction(0)
    for perm in itertools.permutations(range(1, n + 1)):
        for zeta in (1, 2):
            w = Fraction(1, factorial(n) * 2)  # uniform response either way
            z = [1 + sum(1 for l in range(i) if perm[l] < perm[i]) for i in range(t)]
            den += w
            if z[t - 1] == 1:
                num += w
    assert num / den == Fraction(1, t)


def test_lemma2_budget():
    with pytest.raises(BudgetExceeded):
        verify_lemma2(9, UNIFORM)
