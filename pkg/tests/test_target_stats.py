import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordboost.dataset import Permutation
from ordboost.target_stats import (
    GREEDY, HOLDOUT, LEAVE_ONE_OUT, ORDERED, TSConfig, build_table, encode, greedy_ts, holdout_ts,
    leave_one_out_ts, ordered_ts, p1_test,
)

from oracles import ordered_ts_quadratic


def identity(n):
    return Permutation(np.arange(n))


def test_greedy_uses_every_row():
    r = greedy_ts([0, 0, 0], [1.0, 0.0, 1.0], TSConfig(a=1, p=0.5, mode=GREEDY))
    assert r.values.tolist() == [0.625] * 3


def test_greedy_singleton_category():
    r = greedy_ts([0, 1, 2], [1.0, 1.0, 1.0], TSConfig(a=1, p=0.5, mode=GREEDY))
    assert r.values.tolist() == [0.75] * 3


def test_unseen_category_gets_prior():
    table = build_table([0, 0], [1.0, 0.0], 1.0, 0.3)
    assert table.lookup([-1, 5]).tolist() == [0.3, 0.3]


def test_default_prior_is_mean_target():
    assert TSConfig().prior([1.0, 0.0, 0.0, 0.0]) == 0.25
    with pytest.raises(ValueError):
        TSConfig(a=-1)
    with pytest.raises(ValueError):
        TSConfig(mode="other")


def test_holdout_statistics_come_from_the_other_part():
    ids = [0, 0, 0, 1]
    y = [1.0, 0.0, 1.0, 0.0]
    mask = [True, True, False, False]
    r = holdout_ts(ids, y, TSConfig(a=0, p=0.5, mode=HOLDOUT), holdout_mask=mask)
    assert r.rows.tolist() == [2, 3]
    # A seen twice in the statistics part with mean 0.5; B never seen, so a=0 falls back to p
    assert r.values.tolist() == [0.5, 0.5]


def test_holdout_unseen_category_gets_prior():
    r = holdout_ts([0, 1], [1.0, 1.0], TSConfig(a=1, p=0.5, mode=HOLDOUT), holdout_mask=[True, False])
    assert r.values.tolist() == [0.5]


def test_holdout_partition_is_half_and_seeded():
    ids = np.zeros(10, dtype=int)
    y = np.arange(10) % 2
    a = holdout_ts(ids, y, TSConfig(mode=HOLDOUT), partition_seed=3)
    b = holdout_ts(ids, y, TSConfig(mode=HOLDOUT), partition_seed=3)
    assert len(a.rows) == 5 and np.array_equal(a.rows, b.rows)


def test_holdout_rejects_degenerate_partitions():
    with pytest.raises(ValueError):
        holdout_ts([0], [1.0], TSConfig(mode=HOLDOUT), partition_seed=0)
    with pytest.raises(ValueError):
        holdout_ts([0, 0], [1.0, 0.0], TSConfig(mode=HOLDOUT), holdout_mask=[True, True])


def test_leave_one_out_on_constant_feature():
    r = leave_one_out_ts([0, 0, 0, 0], [1.0, 1.0, 0.0, 0.0], TSConfig(a=0, mode=LEAVE_ONE_OUT))
    assert np.allclose(r.values, [1 / 3, 1 / 3, 2 / 3, 2 / 3], rtol=0, atol=1e-15)
    assert r.table.lookup([0]).tolist() == [0.5]


def test_leave_one_out_singleton_gets_prior():
    r = leave_one_out_ts([0, 1], [1.0, 0.0], TSConfig(a=1, p=0.5, mode=LEAVE_ONE_OUT))
    assert r.values.tolist() == [0.5, 0.5]


def test_ordered_identity_example():
    r = ordered_ts([0, 0, 0], [1.0, 0.0, 1.0], TSConfig(a=1, p=0.5), identity(3))
    assert r.values.tolist() == [0.5, 0.75, 0.5]


def test_ordered_first_row_gets_prior():
    perm = Permutation(np.array([2, 0, 1]))
    r = ordered_ts([0, 0, 0], [1.0, 1.0, 0.0], TSConfig(a=1, p=0.2), perm)
    assert r.values[2] == 0.2


def test_ordered_needs_matching_permutation():
    with pytest.raises(ValueError):
        ordered_ts([0, 0], [1.0, 0.0], TSConfig(), identity(3))
    with pytest.raises(ValueError):
        encode([0, 0], [1.0, 0.0], TSConfig(mode=ORDERED))


cases = st.integers(1, 40).flatmap(lambda n: st.tuples(
    st.lists(st.integers(0, 4), min_size=n, max_size=n),
    st.lists(st.sampled_from([0.0, 1.0]), min_size=n, max_size=n),
    st.permutations(list(range(n))),
    st.floats(0.0, 5.0),
    st.floats(0.0, 1.0),
))


@settings(max_examples=150)
@given(cases)
def test_ordered_matches_quadratic_oracle(case):
    ids, y, order, a, p = case
    got = ordered_ts(ids, y, TSConfig(a=a, p=p), Permutation(np.array(order))).values
    want = ordered_ts_quadratic(ids, y, order, a, p)
    assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


@settings(max_examples=100)
@given(cases, st.data())
def test_ordered_prefix_property(case, data):
    ids, y, order, a, p = case
    n = len(ids)
    k = data.draw(st.integers(0, n - 1))
    perm = Permutation(np.array(order))
    before = ordered_ts(ids, y, TSConfig(a=a, p=p), perm).values
    ids2, y2 = list(ids), list(y)
    for row in order[k + 1:]:
        ids2[row] = (ids2[row] + 1) % 5
        y2[row] = 1.0 - y2[row]
    after = ordered_ts(ids2, y2, TSConfig(a=a, p=p), perm).values
    for row in order[:k + 1]:
        assert after[row] == before[row]


@settings(max_examples=100)
@given(cases, st.sampled_from([GREEDY, LEAVE_ONE_OUT, HOLDOUT, ORDERED]))
def test_encodings_lie_in_convex_range(case, mode):
    ids, y, order, a, p = case
    if mode == HOLDOUT and len(ids) < 2:
        return
    r = encode(ids, y, TSConfig(a=a, p=p, mode=mode), perm=Permutation(np.array(order)), partition_seed=1)
    lo, hi = min(p, min(y)), max(p, max(y))
    assert np.all(r.values >= lo - 1e-12) and np.all(r.values <= hi + 1e-12)


@given(st.lists(st.sampled_from([0.0, 1.0]), min_size=1, max_size=30), st.floats(0.1, 5.0), st.floats(0.0, 1.0))
def test_singleton_categories_expose_greedy_leakage(y, a, p):
    ids = list(range(len(y)))
    cfg = TSConfig(a=a, p=p)
    g = greedy_ts(ids, y, cfg).values
    loo = leave_one_out_ts(ids, y, cfg).values
    assert np.allclose(g, (np.array(y) + a * p) / (1 + a), rtol=0, atol=1e-15)
    assert np.allclose(loo, p, rtol=0, atol=1e-15)


@settings(max_examples=50)
@given(cases)
def test_apply_table_equals_greedy_values(case):
    ids, y, order, a, p = case
    cfg = TSConfig(a=a, p=p)
    want = greedy_ts(ids, y, cfg).values
    for mode in (LEAVE_ONE_OUT, ORDERED):
        r = encode(ids, y, TSConfig(a=a, p=p, mode=mode), perm=Permutation(np.array(order)))
        assert np.allclose(r.table.lookup(ids), want, rtol=0, atol=1e-15)


def test_p1_identical_vectors_not_rejected():
    rng = np.random.default_rng(0)
    v = rng.random(100)
    y = rng.integers(0, 2, 100)
    assert p1_test(v, y, v, y).holds


def test_p1_detects_shifted_means():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 2, 500)
    assert p1_test(rng.random(500) + 0.2, y, rng.random(500), y).rejected


def test_p1_needs_both_classes():
    with pytest.raises(ValueError):
        p1_test([0.1, 0.2, 0.3], [1, 1, 1], [0.1, 0.2, 0.3], [1, 1, 1])
