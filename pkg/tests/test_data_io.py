import gzip
import io

import numpy as np
import pytest

from greedycd.data_io import (CorrelatedLasso, Dataset, DiagQuadratic,
                              RandomSvm, SynthSpec, fold_labels,
                              gen_synthetic, normalize_columns, parse_libsvm,
                              regression_view, train_test_split, write_libsvm)
from greedycd.objectives import make_lasso
from greedycd.sparse import SparseColMatrix


class TestParser:
    def test_basic_line(self):
        ds = parse_libsvm(b"1 1:0.5 3:2.0\n")
        assert ds.matrix.n_cols == 1
        ridx, vals = ds.matrix.col(0)
        np.testing.assert_array_equal(ridx, [0, 2])
        np.testing.assert_array_equal(vals, [0.5, 2.0])
        assert ds.labels[0] == 1.0

    def test_comments_and_blanks_skipped(self):
        ds = parse_libsvm(b"# header\n\n-1 2:1.5  # trailing\n")
        assert ds.matrix.n_cols == 1
        assert ds.labels[0] == -1.0

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            parse_libsvm(b"# nothing here\n")

    def test_zero_index_rejected(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_libsvm(b"1 0:2.0\n")

    def test_non_increasing_index_rejected(self):
        with pytest.raises(ValueError, match="line 2"):
            parse_libsvm(b"1 1:1\n1 3:1 2:1\n")

    def test_duplicate_index_rejected(self):
        with pytest.raises(ValueError, match="not strictly increasing"):
            parse_libsvm(b"1 2:1 2:3\n")

    def test_non_numeric_rejected(self):
        with pytest.raises(ValueError, match="label"):
            parse_libsvm(b"x 1:1\n")
        with pytest.raises(ValueError, match="malformed"):
            parse_libsvm(b"1 a:b\n")

    def test_gzip_detected_by_magic_bytes(self):
        raw = b"1 1:0.5 2:1.0\n-1 2:3.0\n"
        ds = parse_libsvm(gzip.compress(raw))
        assert ds.matrix.n_cols == 2
        assert list(ds.labels) == [1.0, -1.0]

    def test_roundtrip_random(self, rng):
        cols = []
        labels = rng.standard_normal(20)
        for _ in range(20):
            k = int(rng.integers(1, 8))
            ridx = np.sort(rng.choice(10, size=k, replace=False))
            cols.append((ridx, rng.standard_normal(k)))
        ds = Dataset(SparseColMatrix.from_columns(10, cols), labels)
        buf = io.StringIO()
        write_libsvm(ds, buf)
        back = parse_libsvm(buf.getvalue().encode())
        np.testing.assert_array_equal(back.labels, ds.labels)
        assert back.matrix.n_rows <= ds.matrix.n_rows
        np.testing.assert_array_equal(
            back.matrix.to_dense(),
            ds.matrix.to_dense()[:back.matrix.n_rows])


class TestNormalize:
    def test_three_four_five(self):
        M = SparseColMatrix.from_dense(np.array([[3.0], [4.0]]))
        ds, scales, dropped = normalize_columns(Dataset(M, np.zeros(2)))
        np.testing.assert_allclose(ds.matrix.to_dense().ravel(), [0.6, 0.8])
        assert scales[0] == pytest.approx(5.0)
        assert len(dropped) == 0

    def test_idempotent(self, rng):
        M = SparseColMatrix.from_dense(rng.standard_normal((5, 4)))
        ds1, _, _ = normalize_columns(Dataset(M, np.zeros(4)))
        ds2, scales, _ = normalize_columns(ds1)
        np.testing.assert_allclose(scales, 1.0, atol=1e-12)
        np.testing.assert_allclose(ds2.matrix.to_dense(),
                                   ds1.matrix.to_dense())

    def test_zero_column_dropped_and_reported(self):
        A = np.array([[1.0, 0.0], [0.0, 0.0]])
        ds, _, dropped = normalize_columns(
            Dataset(SparseColMatrix.from_dense(A), np.array([1.0, -1.0])))
        assert ds.matrix.n_cols == 1
        assert list(dropped) == [1]
        assert list(ds.labels) == [1.0]

    def test_lasso_smoothness_one_after_normalize(self, rng):
        A = rng.standard_normal((6, 5))
        ds, _, _ = normalize_columns(
            Dataset(SparseColMatrix.from_dense(A), np.zeros(5)))
        p = make_lasso(ds.matrix, rng.standard_normal(6), 0.1)
        assert p.smoothness == pytest.approx(1.0)


class TestSynthetic:
    def test_diag_quadratic_mu1(self):
        ds = gen_synthetic(SynthSpec(DiagQuadratic((1.0, 1.0)), seed=0))
        assert ds.meta["mu1"] == pytest.approx(0.5)
        assert ds.meta["L"] == pytest.approx(1.0)
        ds = gen_synthetic(SynthSpec(DiagQuadratic((4.0, 1.0)), seed=0))
        assert ds.meta["mu1"] == pytest.approx(0.8)
        assert ds.meta["L"] == pytest.approx(4.0)

    def test_diag_quadratic_mu1_bounds(self, rng):
        for _ in range(10):
            spec = tuple(rng.uniform(0.5, 10, int(rng.integers(2, 8))))
            ds = gen_synthetic(SynthSpec(DiagQuadratic(spec), seed=1))
            assert ds.meta["mu1"] <= min(spec) + 1e-12
            assert ds.meta["mu1"] > 0

    def test_determinism(self):
        spec = SynthSpec(CorrelatedLasso(20, 10), seed=5)
        a = gen_synthetic(spec)
        b = gen_synthetic(spec)
        np.testing.assert_array_equal(a.matrix.to_dense(),
                                      b.matrix.to_dense())
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_random_svm_separable(self):
        ds = gen_synthetic(SynthSpec(RandomSvm(40, 6, 0.3), seed=2))
        w = ds.meta["true_normal"]
        margins = ds.labels * (w @ ds.matrix.to_dense())
        assert margins.min() >= 0.3 - 1e-9

    def test_invalid_specs_rejected(self):
        with pytest.raises(ValueError):
            gen_synthetic(SynthSpec(DiagQuadratic(()), seed=0))
        with pytest.raises(ValueError):
            gen_synthetic(SynthSpec(CorrelatedLasso(0, 5), seed=0))
        with pytest.raises(ValueError):
            gen_synthetic(SynthSpec(RandomSvm(1, 5), seed=0))


class TestFolding:
    def test_fold_scales_by_labels(self, rng):
        A = rng.standard_normal((4, 3))
        labels = np.array([1.0, -1.0, 1.0])
        folded = fold_labels(Dataset(SparseColMatrix.from_dense(A), labels))
        np.testing.assert_allclose(folded.to_dense(), A * labels)

    def test_fold_requires_pm_one(self):
        ds = Dataset(SparseColMatrix.from_dense(np.eye(2)),
                     np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            fold_labels(ds)

    def test_regression_view_transposes(self, rng):
        A = rng.standard_normal((4, 3))
        ds = Dataset(SparseColMatrix.from_dense(A), rng.standard_normal(3))
        M, b = regression_view(ds)
        np.testing.assert_array_equal(M.to_dense(), A.T)
        np.testing.assert_array_equal(b, ds.labels)


class TestSplit:
    def _dataset(self, rng, n=100):
        M = SparseColMatrix.from_dense(rng.standard_normal((5, n)))
        return Dataset(M, rng.choice([-1.0, 1.0], n))

    def test_75_25(self, rng):
        train, test = train_test_split(self._dataset(rng), 0.75, seed=1)
        assert train.matrix.n_cols == 75
        assert test.matrix.n_cols == 25

    def test_two_examples(self, rng):
        train, test = train_test_split(self._dataset(rng, n=2), 0.5, seed=1)
        assert train.matrix.n_cols == 1 and test.matrix.n_cols == 1

    def test_partition_property(self, rng):
        ds = self._dataset(rng, n=40)
        train, test = train_test_split(ds, 0.6, seed=3)
        combined = np.concatenate([
            np.sort(train.matrix.to_dense().sum(axis=0)),
            np.sort(test.matrix.to_dense().sum(axis=0))])
        np.testing.assert_allclose(np.sort(combined),
                                   np.sort(ds.matrix.to_dense().sum(axis=0)))

    def test_degenerate_rejected(self, rng):
        ds = self._dataset(rng, n=3)
        with pytest.raises(ValueError):
            train_test_split(ds, 0.01, seed=0)
        with pytest.raises(ValueError):
            train_test_split(ds, 1.5, seed=0)
