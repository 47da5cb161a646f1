"""Synthetic blob generator and CSV ingestion."""

import numpy as np
import pytest

from neuronprune import Dataset, load_csv, make_blobs


class TestDatasetType:
    def test_splits_must_cover_every_sample(self):
        x = np.zeros((4, 2))
        y = np.zeros(4, dtype=np.int64)
        with pytest.raises(ValueError):
            Dataset(x, y, np.array([0, 1]), np.array([2]), np.array([2]))

    def test_splits_must_be_disjoint(self):
        x = np.zeros((4, 2))
        y = np.zeros(4, dtype=np.int64)
        with pytest.raises(ValueError):
            Dataset(x, y, np.array([0, 1, 2]), np.array([2]), np.array([3]))

    def test_non_finite_features_rejected(self):
        x = np.zeros((3, 2))
        x[1, 0] = np.inf
        y = np.zeros(3, dtype=np.int64)
        with pytest.raises(ValueError):
            Dataset(x, y, np.array([0]), np.array([1]), np.array([2]))

    def test_split_accessor(self):
        x = np.arange(12.0).reshape(6, 2)
        y = np.array([0, 1, 0, 1, 0, 1], dtype=np.int64)
        ds = Dataset(x, y, np.array([0, 1, 2]), np.array([3]), np.array([4, 5]))
        xs, ys = ds.split("val")
        np.testing.assert_array_equal(xs, x[3:4])
        np.testing.assert_array_equal(ys, [1])
        with pytest.raises(ValueError):
            ds.split("holdout")


class TestMakeBlobs:
    def test_default_shape_and_classes(self):
        ds = make_blobs()
        assert ds.features.shape == (4300, 57)
        assert ds.n_classes == 2
        assert len(ds.train_idx) + len(ds.val_idx) + len(ds.test_idx) == 4300

    def test_same_seed_is_bitwise_identical(self):
        a = make_blobs(seed=9)
        b = make_blobs(seed=9)
        np.testing.assert_array_equal(a.features, b.features)
        np.testing.assert_array_equal(a.labels, b.labels)
        np.testing.assert_array_equal(a.train_idx, b.train_idx)

    def test_different_seed_differs(self):
        assert not np.array_equal(make_blobs(seed=0).features, make_blobs(seed=1).features)

    def test_class_centers_sit_at_requested_separation(self):
        ds = make_blobs(n_samples=3000, n_features=10, n_classes=3, separation=6.0,
                        label_noise=0.0, seed=2)
        centers = [ds.features[ds.labels == c].mean(axis=0) for c in range(3)]
        for i in range(3):
            for j in range(i + 1, 3):
                d = np.linalg.norm(centers[i] - centers[j])
                assert d == pytest.approx(6.0, abs=0.15)

    def test_label_noise_rate(self):
        clean = make_blobs(n_samples=4000, label_noise=0.0, seed=3)
        noisy = make_blobs(n_samples=4000, label_noise=0.1, seed=3)
        flipped = np.mean(clean.labels != noisy.labels)
        assert flipped == pytest.approx(0.1, abs=0.02)

    def test_fraction_validation(self):
        with pytest.raises(ValueError):
            make_blobs(fractions=(0.5, 0.5, 0.2))
        with pytest.raises(ValueError):
            make_blobs(fractions=(1.0, 0.0, 0.0))

    def test_labels_are_every_class(self):
        ds = make_blobs(n_samples=400, n_classes=5, seed=4)
        assert set(np.unique(ds.labels)) == set(range(5))


class TestLoadCsv:
    def write_csv(self, path, n=60, d=3, header=False, seed=0):
        rng = np.random.default_rng(seed)
        x = rng.normal(2.0, 3.0, size=(n, d))
        y = rng.integers(0, 2, size=n)
        with open(path, "w") as fh:
            if header:
                fh.write(",".join(f"f{k}" for k in range(d)) + ",label\n")
            for row, lab in zip(x, y):
                fh.write(",".join(f"{v:.10g}" for v in row) + f",{lab}\n")
        return x, y

    def test_round_trip_values_and_labels(self, tmp_path):
        p = tmp_path / "data.csv"
        x, y = self.write_csv(p)
        ds = load_csv(p, standardize=False)
        np.testing.assert_allclose(ds.features, np.loadtxt(p, delimiter=",")[:, :3])
        np.testing.assert_array_equal(ds.labels, y)

    def test_header_flag_skips_one_line(self, tmp_path):
        p = tmp_path / "data.csv"
        self.write_csv(p, header=True)
        with pytest.raises(ValueError):
            load_csv(p)
        ds = load_csv(p, has_header=True)
        assert ds.features.shape == (60, 3)

    def test_standardization_uses_train_statistics_only(self, tmp_path):
        p = tmp_path / "data.csv"
        self.write_csv(p, n=100)
        ds = load_csv(p, seed=5)
        raw = load_csv(p, seed=5, standardize=False)
        mu = raw.features[raw.train_idx].mean(axis=0)
        sd = raw.features[raw.train_idx].std(axis=0)
        np.testing.assert_allclose(ds.features, (raw.features - mu) / sd, rtol=1e-12)
        train_part = ds.features[ds.train_idx]
        np.testing.assert_allclose(train_part.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(train_part.std(axis=0), 1.0, rtol=1e-12)

    def test_non_integer_label_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text("1.0,2.0,0.5\n2.0,1.0,1\n")
        with pytest.raises(ValueError):
            load_csv(p)

    def test_split_seed_controls_partition(self, tmp_path):
        p = tmp_path / "data.csv"
        self.write_csv(p)
        a = load_csv(p, seed=1)
        b = load_csv(p, seed=1)
        c = load_csv(p, seed=2)
        np.testing.assert_array_equal(a.train_idx, b.train_idx)
        assert not np.array_equal(a.train_idx, c.train_idx)
