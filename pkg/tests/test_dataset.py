import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ordboost.dataset import (
    DataError, Dataset, DatasetLayout, FeatureSchema, Permutation, SchemaError, binarize, gen_permutations,
    load_csv, quantize, split,
)

GOLDEN = Path(__file__).parent / "golden"


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


SCHEMA = FeatureSchema.from_mapping({"x": "numerical", "c": "categorical", "y": "target"})


def test_schema_needs_one_target_and_a_feature():
    with pytest.raises(SchemaError):
        FeatureSchema.from_mapping({"x": "numerical"})
    with pytest.raises(SchemaError):
        FeatureSchema.from_mapping({"y": "target"})
    with pytest.raises(SchemaError):
        FeatureSchema.from_mapping({"a": "target", "b": "target", "x": "numerical"})
    with pytest.raises(SchemaError):
        FeatureSchema.from_mapping({"x": "weird", "y": "target"})


def test_schema_shorthand_defaults_to_numerical():
    s = FeatureSchema.from_spec({"target": "y", "categorical": ["c"]}, ["x", "c", "y", "z"])
    assert s.columns == (("x", "numerical"), ("c", "categorical"), ("y", "target"), ("z", "numerical"))
    with pytest.raises(SchemaError):
        FeatureSchema.from_spec({"target": "y", "bogus": 1}, ["y", "x"])


def test_categories_interned_by_first_appearance(tmp_path):
    p = write(tmp_path, "x,c,y\n1,a,0\n2,b,1\n3,a,0\n")
    d = load_csv(p, SCHEMA)
    assert d.cat[:, 0].tolist() == [0, 1, 0]
    assert d.vocab == (("a", "b"),)


def test_numeric_missing_imputed_with_indicator(tmp_path):
    p = write(tmp_path, "x,c,y\n1,a,0\n,b,1\n3,a,0\n")
    d = load_csv(p, SCHEMA)
    assert d.num_names == ("x", "x__missing")
    assert d.num[:, 0].tolist() == [1.0, 0.0, 3.0]
    assert d.num[:, 1].tolist() == [0.0, 1.0, 0.0]


def test_categorical_missing_becomes_its_own_category(tmp_path):
    p = write(tmp_path, "x,c,y\n1,,0\n2,b,1\n3,NA,0\n")
    d = load_csv(p, SCHEMA)
    assert d.cat[:, 0].tolist() == [0, 1, 0]
    assert d.vocab[0][0] == "<missing>"


def test_missing_policy_error(tmp_path):
    p = write(tmp_path, "x,c,y\n1,a,0\n,b,1\n")
    with pytest.raises(DataError, match="line 3"):
        load_csv(p, SCHEMA, missing_policy="error")


def test_wrong_arity_reports_line(tmp_path):
    p = write(tmp_path, "x,c,y\n1,a,0\n2,b\n")
    with pytest.raises(DataError, match="line 3"):
        load_csv(p, SCHEMA)


def test_non_numeric_value_rejected(tmp_path):
    p = write(tmp_path, "x,c,y\n1,a,0\nabc,b,1\n")
    with pytest.raises(DataError, match="line 3"):
        load_csv(p, SCHEMA)
    p = write(tmp_path, "x,c,y\ninf,a,0\n", "e.csv")
    with pytest.raises(DataError):
        load_csv(p, SCHEMA)


def test_header_schema_mismatch(tmp_path):
    p = write(tmp_path, "x,q,y\n1,a,0\n")
    with pytest.raises(SchemaError):
        load_csv(p, SCHEMA)


def test_reload_gives_identical_ids(tmp_path):
    p = write(tmp_path, "x,c,y\n1,q,0\n2,r,1\n3,q,0\n4,s,1\n")
    a, b = load_csv(p, SCHEMA), load_csv(p, SCHEMA)
    assert np.array_equal(a.cat, b.cat) and a.vocab == b.vocab


def test_layout_alignment_maps_unseen_to_reserved_id(tmp_path):
    train = load_csv(write(tmp_path, "x,c,y\n1,a,0\n2,b,1\n"), SCHEMA)
    test = load_csv(write(tmp_path, "x,c,y\n1,b,0\n2,z,1\n", "t.csv"), SCHEMA, layout=train.layout())
    assert test.cat[:, 0].tolist() == [1, -1]
    other = Dataset.from_arrays(np.zeros((2, 1)), [["b"], ["a"]], [0, 1], num_names=["x"], cat_names=["c"])
    assert other.align(train.layout()).cat[:, 0].tolist() == [1, 0]
    with pytest.raises(SchemaError):
        Dataset.from_arrays(np.zeros((2, 1)), None, [0, 1], num_names=["w"]).align(train.layout())


def test_layout_round_trip():
    layout = DatasetLayout(("x",), ("c",), (("a", "b"),), (), "y")
    assert DatasetLayout.from_dict(json.loads(json.dumps(layout.to_dict()))) == layout


def test_dataset_rejects_nan():
    with pytest.raises(DataError):
        Dataset.from_arrays(np.array([[np.nan]]), None, [0.0])


def test_split_sizes_and_determinism():
    d = Dataset.from_arrays(np.arange(10.0).reshape(-1, 1), None, np.zeros(10))
    tr, te = split(d, 0.2, 5)
    assert (tr.n_rows, te.n_rows) == (8, 2)
    tr2, te2 = split(d, 0.2, 5)
    assert np.array_equal(tr.num, tr2.num) and np.array_equal(te.num, te2.num)
    assert sorted(tr.num[:, 0].tolist() + te.num[:, 0].tolist()) == list(range(10))


def test_split_edge_cases():
    two = Dataset.from_arrays(np.array([[0.0], [1.0]]), None, [0, 1])
    tr, te = split(two, 0.5, 0)
    assert (tr.n_rows, te.n_rows) == (1, 1)
    with pytest.raises(ValueError):
        split(Dataset.from_arrays(np.array([[0.0]]), None, [0]), 0.5, 0)
    with pytest.raises(ValueError):
        split(two, 1.0, 0)


def test_permutations_of_one_row_are_identity():
    for p in gen_permutations(1, 3, 0):
        assert p.order.tolist() == [0]


def test_permutations_are_bijections():
    perms = gen_permutations(5, 2, 11)
    assert len(perms) == 3
    for p in perms:
        assert sorted(p.order.tolist()) == list(range(5))


def test_permutations_match_golden_file():
    g = json.loads((GOLDEN / "permutations.json").read_text())
    perms = gen_permutations(g["n"], g["s"], g["seed"])
    assert [p.order.tolist() for p in perms] == g["orders"]


def test_gen_permutations_rejects_bad_arguments():
    with pytest.raises(ValueError):
        gen_permutations(0, 1, 0)
    with pytest.raises(ValueError):
        gen_permutations(3, 0, 0)


@given(st.integers(1, 200), st.integers(0, 2 ** 32 - 1))
def test_permutation_round_trip(n, seed):
    p = Permutation(np.random.default_rng(seed).permutation(n))
    i = np.arange(n)
    assert np.array_equal(p.position[p.order], i)
    assert np.array_equal(p.order[p.position], i)


def test_quantize_examples():
    assert quantize([0.0, 1.0], 255).tolist() == [0.5]
    assert quantize([3.0, 3.0, 3.0], 255).size == 0
    with pytest.raises(ValueError):
        quantize([1.0, 2.0], 0)


def test_quantize_equal_frequency_buckets():
    values = np.arange(1, 1001, dtype=float)
    borders = quantize(values, 255)
    assert len(borders) == 255
    counts = np.bincount(binarize(values, borders), minlength=256)
    assert counts.max() - counts.min() <= 1


def test_quantize_keeps_every_midpoint_when_few_values():
    values = [5.0, 1.0, 3.0, 3.0, 9.0]
    assert quantize(values, 3).tolist() == [2.0, 4.0, 7.0]


finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


@settings(max_examples=200)
@given(st.lists(finite, min_size=1, max_size=300), st.integers(1, 20))
def test_quantize_borders_are_strictly_inside_the_data(values, border_count):
    borders = quantize(values, border_count)
    uniq = np.unique(values)
    assert len(borders) <= border_count
    assert np.all(np.diff(borders) > 0)
    for b in borders:
        assert uniq.min() <= b < uniq.max()
        # some observed value on each side of the predicate x > b
        assert np.any(uniq <= b) and np.any(uniq > b)
    if len(uniq) <= border_count + 1:
        assert len(borders) == len(uniq) - 1


@given(st.lists(finite, min_size=2, max_size=100), st.integers(1, 10))
def test_binarize_matches_threshold_predicate(values, border_count):
    borders = quantize(values, border_count)
    bins = binarize(values, borders)
    for k, b in enumerate(borders):
        assert np.array_equal(bins > k, np.asarray(values) > b)
