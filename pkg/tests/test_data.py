import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import norm

from mdfs.data import (
    DataError,
    Dataset,
    discretize_all,
    discretize_equal_frequency,
    equal_frequency_codes,
    generate_siren_dataset,
    load_csv,
    make_siren_spec,
    save_csv,
    siren_benchmark_spec,
    stratified_folds,
)
from mdfs.metrics import auc_by_enumeration


def _write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadCsv:
    def test_small_file(self, tmp_path):
        p = _write(tmp_path, "x,y,cls\n1,2,a\n3,4,b\n5,6,a\n7,8,b\n")
        ds = load_csv(p)
        assert (ds.n, ds.m, ds.class_count) == (4, 2, 2)
        assert ds.feature_names == ("x", "y")
        assert ds.class_names == ("a", "b")
        np.testing.assert_array_equal(ds.labels, [0, 1, 0, 1])

    def test_labels_encoded_by_first_appearance(self, tmp_path):
        p = _write(tmp_path, "1,zeta\n2,alpha\n3,zeta\n4,mid\n")
        ds = load_csv(p)
        assert ds.class_names == ("zeta", "alpha", "mid")
        np.testing.assert_array_equal(ds.labels, [0, 1, 0, 2])

    def test_label_column_by_name_and_index(self, tmp_path):
        p = _write(tmp_path, "cls,x,y\na,1,2\nb,3,4\n")
        by_name = load_csv(p, "cls")
        by_index = load_csv(p, 0)
        assert by_name.feature_names == by_index.feature_names == ("x", "y")
        np.testing.assert_array_equal(by_name.values, by_index.values)

    def test_nan_cell_rejected(self, tmp_path):
        p = _write(tmp_path, "x,y,c\n1,2,a\n3,NaN,b\n")
        with pytest.raises(DataError, match="non-finite value at row 1, column 1"):
            load_csv(p)

    def test_inf_cell_rejected(self, tmp_path):
        p = _write(tmp_path, "1,inf,a\n3,4,b\n")
        with pytest.raises(DataError, match="non-finite"):
            load_csv(p)

    @pytest.mark.parametrize(
        "text, match",
        [
            ("x,y,c\n1,2,a\n3,b\n", "ragged"),
            ("x,y,c\n1,two,a\n3,4,b\n", "non-numeric"),
            ("x,c\n1,a\n2,a\n", "at least 2 classes"),
        ],
    )
    def test_malformed(self, tmp_path, text, match):
        with pytest.raises(DataError, match=match):
            load_csv(_write(tmp_path, text))

    def test_unreadable(self, tmp_path):
        with pytest.raises(DataError, match="cannot read"):
            load_csv(tmp_path / "missing.csv")

    def test_synthetic_control_chart_shape(self, tmp_path, rng):
        # same shape as the 600 x 60, 6-class control-chart benchmark
        values = rng.normal(size=(600, 60))
        labels = np.repeat(np.arange(6), 100)
        ds = Dataset(values, labels, (), 6)
        p = tmp_path / "synthetic.csv"
        save_csv(ds, p)
        back = load_csv(p)
        assert (back.n, back.m, back.class_count) == (600, 60, 6)

    def test_round_trip(self, tmp_path, rng):
        ds = Dataset(rng.normal(size=(30, 4)) * 1e3, rng.permutation(np.arange(30) % 3), (), 3)
        p = tmp_path / "rt.csv"
        save_csv(ds, p)
        back = load_csv(p)
        np.testing.assert_array_equal(back.values, ds.values)
        # labels come back re-encoded in first-appearance order
        mapping = {int(a): int(b) for a, b in zip(ds.labels, back.labels)}
        assert len(set(mapping.values())) == 3
        np.testing.assert_array_equal([mapping[int(a)] for a in ds.labels], back.labels)


class TestDataset:
    def test_immutable(self, rng):
        ds = Dataset(rng.normal(size=(4, 2)), [0, 1, 0, 1], (), 2)
        with pytest.raises(ValueError):
            ds.values[0, 0] = 1.0
        assert ds.values.flags.f_contiguous

    @pytest.mark.parametrize(
        "values, labels, c",
        [
            (np.zeros((1, 2)), [0], 2),
            (np.zeros((3, 2)), [0, 0, 0], 2),
            (np.zeros((3, 2)), [0, 1, 2], 2),
            (np.array([[0.0], [np.nan]]), [0, 1], 2),
        ],
    )
    def test_invariants_enforced(self, values, labels, c):
        with pytest.raises(DataError):
            Dataset(values, labels, (), c)

    def test_subset_keeps_row_ids(self, rng):
        ds = Dataset(rng.normal(size=(6, 2)), [0, 1, 0, 1, 0, 1], (), 2)
        sub = ds.subset([5, 2, 1, 0])
        np.testing.assert_array_equal(sub.row_ids, [5, 2, 1, 0])
        np.testing.assert_array_equal(sub.subset([1, 2]).row_ids, [2, 1])


class TestDiscretize:
    def test_constant(self):
        d = equal_frequency_codes(np.full(9, 3.5), 4)
        assert d.bin_count == 1
        assert np.all(d.codes == 0)

    def test_median_split(self):
        ds = Dataset(np.arange(1, 11, dtype=float)[:, None], [0, 1] * 5, (), 2)
        d = discretize_equal_frequency(ds, 0, 2)
        np.testing.assert_array_equal(d.codes, [0] * 5 + [1] * 5)

    def test_ties_share_a_bin(self):
        d = equal_frequency_codes(np.array([1, 1, 1, 1, 2, 2.0]), 3)
        assert d.bin_count == 2
        np.testing.assert_array_equal(d.codes, [0, 0, 0, 0, 1, 1])

    @settings(max_examples=200, deadline=None)
    @given(
        st.lists(st.integers(-5, 5), min_size=1, max_size=60),
        st.integers(1, 12),
    )
    def test_order_preserving_and_bounded(self, raw, bins):
        x = np.array(raw, dtype=float)
        d = equal_frequency_codes(x, bins)
        assert 1 <= d.bin_count <= bins
        assert d.codes.max() < d.bin_count
        assert set(np.unique(d.codes)) == set(range(d.bin_count))
        i, j = np.meshgrid(np.arange(x.size), np.arange(x.size))
        le = x[i] <= x[j]
        assert np.all(d.codes[i][le] <= d.codes[j][le])

    def test_bulk_matches_single_column(self, rng):
        x = np.round(rng.normal(size=(73, 6)), 1)
        codes, counts = discretize_all(x, 10)
        for j in range(6):
            single = equal_frequency_codes(x[:, j], 10)
            np.testing.assert_array_equal(codes[:, j], single.codes)
            assert counts[j] == single.bin_count


class TestStratifiedFolds:
    def test_one_class_ten_folds(self):
        fa = stratified_folds(np.zeros(10, dtype=int), 10, 0)
        np.testing.assert_array_equal(np.bincount(fa.fold_of), np.ones(10))

    def test_balanced_two_class(self):
        labels = np.repeat([0, 1], 50)
        fa = stratified_folds(labels, 5, 3)
        for f in range(5):
            assert np.bincount(labels[fa.fold_of == f], minlength=2).tolist() == [10, 10]

    def test_deterministic(self):
        labels = np.arange(37) % 4
        a = stratified_folds(labels, 7, 11)
        b = stratified_folds(labels, 7, 11)
        np.testing.assert_array_equal(a.fold_of, b.fold_of)

    def test_k_below_two(self):
        with pytest.raises(DataError):
            stratified_folds([0, 1], 1, 0)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 4), min_size=2, max_size=80), st.integers(2, 10), st.integers(0, 2**31))
    def test_stratification_property(self, labels, k, seed):
        labels = np.array(labels)
        fa = stratified_folds(labels, k, seed)
        assert fa.fold_of.min() >= 0 and fa.fold_of.max() < k
        for cls in np.unique(labels):
            per_fold = np.bincount(fa.fold_of[labels == cls], minlength=k)
            assert per_fold.max() - per_fold.min() <= 1


class TestSirenGenerator:
    def test_zero_gaps_are_uninformative(self):
        spec = make_siren_spec([400, 400, 400], np.zeros((3, 3)), [((0, 1), range(5))], 5, seed=1)
        sd = generate_siren_dataset(spec)
        ds = sd.dataset
        for j in range(5):
            a = auc_by_enumeration(ds.values[ds.labels == 0, j][:150], ds.values[ds.labels == 1, j][:150])
            assert abs(a - 0.5) < 0.1

    @pytest.mark.parametrize("layout", ["centered", "anchored"])
    def test_planted_pair_features_win_on_their_pair(self, layout):
        gaps = np.array([[0, 3.0, 0.5], [3.0, 0, 0.5], [0.5, 0.5, 0]])
        groups = [((0, 1), range(0, 5)), ((0, 2), range(5, 8)), ((1, 2), range(8, 10))]
        sd = generate_siren_dataset(make_siren_spec([1000] * 3, gaps, groups, 10, seed=5, layout=layout))
        ds = sd.dataset
        a, b = ds.values[ds.labels == 0], ds.values[ds.labels == 1]
        from mdfs.metrics import auc

        aucs = [max(auc(b[:, j], a[:, j]), auc(a[:, j], b[:, j])) for j in range(10)]
        assert min(aucs[:5]) - max(aucs[5:]) >= 0.1
        assert sd.features_for((1, 0)) == (0, 1, 2, 3, 4)

    def test_deterministic(self):
        spec = siren_benchmark_spec(seed=9)
        a = generate_siren_dataset(spec).dataset
        b = generate_siren_dataset(spec).dataset
        assert a.values.tobytes() == b.values.tobytes()

    @pytest.mark.parametrize("gap", [0.5, 1.0, 2.0])
    def test_pair_auc_matches_normal_cdf(self, gap):
        from mdfs.metrics import auc

        spec = make_siren_spec([5000, 5000], [[0, gap], [gap, 0]], [((0, 1), [0])], 1, seed=2)
        ds = generate_siren_dataset(spec).dataset
        got = auc(ds.values[ds.labels == 1, 0], ds.values[ds.labels == 0, 0])
        assert got == pytest.approx(norm.cdf(gap / math.sqrt(2)), abs=0.03)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(gaps=np.zeros((2, 2))),
            dict(groups=[((0, 5), [0])]),
            dict(groups=[((0, 1), [0]), ((1, 2), [0])]),
            dict(groups=[((0, 1), [9])]),
        ],
    )
    def test_inconsistent_plan(self, kwargs):
        base = dict(class_sizes=[5, 5, 5], gaps=np.ones((3, 3)), groups=[((0, 1), [0])], n_features=3)
        base.update(kwargs)
        with pytest.raises(DataError):
            generate_siren_dataset(make_siren_spec(**base))
