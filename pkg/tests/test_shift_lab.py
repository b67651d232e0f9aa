from fractions import Fraction

import numpy as np
import pytest

from ordboost.shift_lab import (
    POINTS, TwoStumpConfig, brute_force_bias, compositions, lemma_expectations, p1_check, simulate_two_stumps,
    ts_leakage_demo,
)

from oracles import raw_enumeration_bias


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6])
def test_grouped_enumeration_matches_raw_datasets(n):
    exact = brute_force_bias(n, 2, 1)
    raw, p_accept = raw_enumeration_bias(n, 2, 1)
    assert exact.bias == raw
    assert exact.p_accept == p_accept


@pytest.mark.parametrize("n", range(2, 10))
def test_probabilities_and_acceptance(n):
    exact = brute_force_bias(n)
    assert exact.total_probability == 1
    assert sum(w for _, w in compositions(n)) == 1
    assert exact.p_accept >= 1 - 4 * Fraction(3, 4) ** n


@pytest.mark.parametrize("shared", [True, False])
def test_bias_does_not_depend_on_first_coordinate(shared):
    exact = brute_force_bias(6, shared_data=shared)
    for t in (0, 1):
        assert exact.bias[(0, t)] == exact.bias[(1, t)]


@pytest.mark.parametrize("n", range(3, 10))
def test_shared_bias_sign(n):
    exact = brute_force_bias(n, 2, 1)
    for s in (0, 1):
        assert exact.bias[(s, 1)] < 0 < exact.bias[(s, 0)]


def test_shared_bias_near_leading_order_at_six():
    exact = brute_force_bias(6, 2, 1)
    assert abs(float(exact.bias[(0, 1)]) - (-0.5 / 5)) <= 10 * 2.0 ** -6


@pytest.mark.parametrize("n", [4, 6])
def test_independent_samples_are_unbiased(n):
    exact = brute_force_bias(n, 2, 1, shared_data=False)
    assert all(v == 0 for v in exact.bias.values())


def test_no_shift_without_second_feature_effect():
    exact = brute_force_bias(6, 2, 0)
    assert all(v == 0 for v in exact.bias.values())
    report = simulate_two_stumps(TwoStumpConfig(n=10, c1=2, c2=0, replicates=20_000, seed=1))
    for x in POINTS:
        assert abs(report.bias[x]) <= 1e-12


def test_enumeration_limits():
    with pytest.raises(ValueError):
        brute_force_bias(10)
    with pytest.raises(ValueError):
        lemma_expectations(13)
    with pytest.raises(ValueError):
        TwoStumpConfig(c1=1, c2=2)


@pytest.mark.parametrize("shared", [True, False])
def test_monte_carlo_agrees_with_enumeration(shared):
    n = 7
    exact = brute_force_bias(n, 2, 1, shared_data=shared)
    report = simulate_two_stumps(TwoStumpConfig(n=n, shared_data=shared, replicates=100_000, seed=3))
    assert report.count == 100_000
    for x in POINTS:
        assert abs(report.bias[x] - float(exact.bias[x])) <= 3.5 * report.stderr[x]


def test_monte_carlo_rejection_rate_matches_acceptance_probability():
    n = 5
    report = simulate_two_stumps(TwoStumpConfig(n=n, replicates=50_000, seed=4))
    rate = report.count / (report.count + report.rejected)
    p = float(brute_force_bias(n).p_accept)
    assert abs(rate - p) <= 4 * np.sqrt(p * (1 - p) / (report.count + report.rejected))


def test_monte_carlo_is_reproducible():
    cfg = TwoStumpConfig(n=8, replicates=5_000, seed=11)
    assert simulate_two_stumps(cfg).bias == simulate_two_stumps(cfg).bias


def test_report_csv_has_one_row_per_point():
    report = simulate_two_stumps(TwoStumpConfig(n=6, replicates=1_000))
    lines = report.to_csv().splitlines()
    assert lines[0] == "s,t,bias,stderr,theory,count,rejected"
    assert len(lines) == 5


def lemma_map(n):
    return {c.name: c for c in lemma_expectations(n)}


def test_lemma_values_at_four():
    m = lemma_map(4)
    assert m["inverse_leaf_one_example[t=0]"].exact == Fraction(1, 2)
    assert float(m["inverse_x2_leaf_given_00_01"].exact) == pytest.approx(0.583333333333, abs=1e-12)
    assert float(m["inverse_leaf_two_examples[t1=0,t2=1]"].closed_form) == pytest.approx(0.388888888889, abs=1e-12)


@pytest.mark.parametrize("n", range(3, 13))
def test_exact_lemmas_equal_closed_forms(n):
    for check in lemma_expectations(n):
        if check.name.startswith("first_stump"):
            assert abs(check.difference) <= Fraction(1, 2 ** n)
        else:
            assert check.difference == 0, check.name


def test_greedy_leakage_construction():
    r = ts_leakage_demo(1000, 10_000, seed=0)
    assert r.greedy_train_accuracy == 1.0
    assert 0.45 <= r.greedy_test_accuracy <= 0.55


def test_leave_one_out_leakage_construction():
    r = ts_leakage_demo(500, 500, a=2.0, p=0.3, seed=5)
    assert r.loo_train_accuracy == 1.0


def test_leakage_demo_needs_enough_rows():
    with pytest.raises(ValueError):
        ts_leakage_demo(50, 500)


def test_p1_on_distinct_categories():
    assert p1_check("ordered", seed=0).holds
    assert p1_check("holdout", seed=0).holds
    assert p1_check("greedy", seed=0).rejected
