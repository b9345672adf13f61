import numpy as np
import pytest

from boostdyn.dataset import Dataset, DatasetError, load_csv, require_both_labels, save_csv, split
from boostdyn.synthetic import two_gaussians


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestDatasetValidation:
    def test_rejects_single_row(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros((1, 2)), np.array([1]))

    def test_rejects_labels_outside_pm1(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros((3, 1)), np.array([1, 0, -1]))

    def test_rejects_non_finite_features(self):
        X = np.array([[0.0], [np.nan], [1.0]])
        with pytest.raises(DatasetError):
            Dataset(X, np.array([1, -1, 1]))

    def test_features_are_read_only(self):
        ds = Dataset(np.zeros((2, 1)), np.array([1, -1]))
        with pytest.raises(ValueError):
            ds.features[0, 0] = 5.0

    def test_single_label_flagged(self):
        ds = Dataset(np.arange(4.0).reshape(2, 2), np.array([1, 1]))
        assert not ds.has_both_labels()
        with pytest.raises(DatasetError):
            require_both_labels(ds)

    def test_subset_preserves_rows(self):
        ds = two_gaussians(m=10, seed=0)
        sub = ds.subset([0, 3, 7])
        assert sub.m == 3
        np.testing.assert_array_equal(sub.features, ds.features[[0, 3, 7]])
        np.testing.assert_array_equal(sub.labels, ds.labels[[0, 3, 7]])


class TestLoadCsv:
    def test_zero_one_labels_mapped_in_file_order(self, tmp_path):
        p = write(tmp_path / "d.csv", "x,label\n1.0,0\n2.0,1\n3.0,0\n")
        ds = load_csv(p, label_mapping={"0": -1, "1": 1})
        np.testing.assert_array_equal(ds.labels, [-1, 1, -1])
        np.testing.assert_array_equal(ds.features[:, 0], [1.0, 2.0, 3.0])

    def test_non_numeric_feature_cell_rejected(self, tmp_path):
        p = write(tmp_path / "d.csv", "x,label\n1.0,1\n?,-1\n")
        with pytest.raises(DatasetError, match="non-numeric"):
            load_csv(p)

    def test_headerless_file_with_label_index(self, tmp_path):
        p = write(tmp_path / "d.csv", "1.0,2.0,1\n3.0,4.0,-1\n")
        ds = load_csv(p, label_column=-1)
        assert ds.d == 2
        np.testing.assert_array_equal(ds.labels, [1, -1])

    def test_label_column_by_name(self, tmp_path):
        p = write(tmp_path / "d.csv", "y,x\n1,5.0\n-1,6.0\n")
        ds = load_csv(p, label_column="y")
        np.testing.assert_array_equal(ds.features[:, 0], [5.0, 6.0])
        assert ds.feature_names == ("x",)

    def test_unknown_label_value_without_mapping(self, tmp_path):
        p = write(tmp_path / "d.csv", "x,label\n1.0,2\n2.0,-1\n")
        with pytest.raises(DatasetError):
            load_csv(p)

    def test_unmapped_label_value(self, tmp_path):
        p = write(tmp_path / "d.csv", "x,label\n1.0,a\n2.0,b\n3.0,c\n")
        with pytest.raises(DatasetError):
            load_csv(p, label_mapping={"a": 1, "b": -1})


class TestSaveRoundTrip:
    def test_synthetic_round_trip_is_bit_exact(self, tmp_path):
        ds = two_gaussians(m=200, seed=5)
        assert ds.m == 200 and ds.d == 2
        p = tmp_path / "tg.csv"
        save_csv(ds, p)
        back = load_csv(p)
        np.testing.assert_array_equal(back.features, ds.features)
        np.testing.assert_array_equal(back.labels, ds.labels)
        assert back.feature_names == ds.feature_names


class TestSplit:
    def test_half_split_partitions(self):
        ds = two_gaussians(m=10, seed=0)
        train, test = split(ds, 0.5, seed=7)
        assert train.m == 5 and test.m == 5
        merged = np.vstack([train.features, test.features])
        # same multiset of rows, nothing lost or duplicated
        assert merged.shape == ds.features.shape
        orig = {tuple(r) for r in ds.features}
        assert {tuple(r) for r in merged} == orig

    def test_split_is_deterministic(self):
        ds = two_gaussians(m=40, seed=1)
        a = split(ds, 0.3, seed=9)
        b = split(ds, 0.3, seed=9)
        np.testing.assert_array_equal(a[0].features, b[0].features)
        np.testing.assert_array_equal(a[1].features, b[1].features)

    def test_degenerate_fraction_rejected(self):
        ds = two_gaussians(m=10, seed=0)
        with pytest.raises(DatasetError):
            split(ds, 0.99, seed=0)

    def test_single_label_train_rejected(self):
        # all-but-two test rows can leave a one-label training part
        X = np.arange(12.0).reshape(6, 2)
        y = np.array([1, 1, 1, 1, -1, -1])
        found = False
        for seed in range(50):
            try:
                train, _ = split(Dataset(X, y), 2 / 3, seed=seed)
                assert train.has_both_labels()
            except DatasetError:
                found = True
        assert found, "no seed produced the degenerate one-label split"

    def test_row_order_follows_input(self):
        ds = two_gaussians(m=20, seed=2)
        train, test = split(ds, 0.4, seed=3)
        # each part keeps original relative order: positions must be sorted
        def positions(part):
            lookup = {tuple(r): i for i, r in enumerate(ds.features)}
            return [lookup[tuple(r)] for r in part.features]

        assert positions(train) == sorted(positions(train))
        assert positions(test) == sorted(positions(test))
