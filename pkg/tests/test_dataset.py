import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ggflex import (DataError, Dataset, FoldPlan, deduplicate, gen_gaussian_pair, load_csv,
                    normalize_zscore, save_csv, stratified_kfold)


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoadCsv:
    def test_three_rows_with_signed_labels(self, tmp_path):
        p = write(tmp_path, "a,b,label\n1,2,+1\n3,4,+1\n5,6,-1\n")
        d = load_csv(p, "label", "+1")
        assert (d.m, d.n_pos, d.n_neg) == (3, 2, 1)
        assert d.feature_names == ("a", "b")
        assert d.y.tolist() == [1, 1, 0]

    def test_nan_cell_reports_row_and_column(self, tmp_path):
        p = write(tmp_path, "a,b,label\n1,2,x\n3,NaN,y\n")
        with pytest.raises(DataError, match=r"row 3, column 1"):
            load_csv(p, positive_label="x")

    def test_unparseable_cell(self, tmp_path):
        p = write(tmp_path, "a,label\nfoo,1\n2,0\n")
        with pytest.raises(DataError, match=r"row 2, column 0.*'foo'"):
            load_csv(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="no such file"):
            load_csv(tmp_path / "absent.csv")

    def test_single_class_rejected(self, tmp_path):
        with pytest.raises(DataError, match="single-class"):
            load_csv(write(tmp_path, "a,l\n1,p\n2,p\n"), positive_label="p")

    def test_third_label_rejected(self, tmp_path):
        with pytest.raises(DataError, match="more than two"):
            load_csv(write(tmp_path, "a,l\n1,p\n2,n\n3,q\n"), positive_label="p")

    def test_positive_label_must_exist(self, tmp_path):
        with pytest.raises(DataError, match="not among"):
            load_csv(write(tmp_path, "a,l\n1,p\n2,n\n"), positive_label="z")

    def test_positive_label_required_for_named_classes(self, tmp_path):
        with pytest.raises(DataError, match="positive_label required"):
            load_csv(write(tmp_path, "a,l\n1,p\n2,n\n"))

    def test_label_column_by_index_and_no_header(self, tmp_path):
        d = load_csv(write(tmp_path, "p;1.5;2\nn;3;4\n"), 0, "p", delimiter=";", header=False)
        assert d.X.tolist() == [[1.5, 2.0], [3.0, 4.0]]
        assert d.feature_names is None

    def test_appendicitis_shape(self, appendicitis):
        assert (appendicitis.m, appendicitis.d, appendicitis.n_pos, appendicitis.n_neg) == (106, 7, 21, 85)

    def test_haberman_dedup_shape(self, haberman_raw):
        d, kept = deduplicate(haberman_raw)
        assert (haberman_raw.m, d.m, d.n_pos, d.n_neg) == (306, 277, 73, 204)
        assert np.all(np.diff(kept) > 0)


class TestRoundTrip:
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=4, max_size=40))
    def test_writer_output_reads_back_bit_exactly(self, tmp_path_factory, values):
        n = len(values) // 2
        X = np.array(values[: 2 * n]).reshape(n, 2)
        y = np.arange(n) % 2
        d = Dataset(X, y, ("u", "v"), "yes", "no")
        p = tmp_path_factory.mktemp("rt") / "d.csv"
        save_csv(d, p)
        back = load_csv(p, "label", "yes")
        assert back.X.tobytes() == d.X.tobytes()
        assert back.y.tolist() == d.y.tolist()
        assert back.digest() == d.digest()


class TestNormalize:
    def test_two_values(self):
        d = Dataset(np.array([[1.0], [3.0]]), [0, 1])
        z, norm = normalize_zscore(d)
        assert z.X[:, 0].tolist() == [-1.0, 1.0]
        assert norm.means[0] == 2.0 and norm.stds[0] == 1.0  # population stddev of {1, 3}

    def test_constant_column_becomes_zero(self):
        d = Dataset(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]), [0, 1, 1])
        z, norm = normalize_zscore(d)
        assert z.X[:, 0].tolist() == [0.0, 0.0, 0.0]
        assert norm.stds[0] == 1.0

    def test_idempotent_on_standardized_data(self):
        z, _ = normalize_zscore(gen_gaussian_pair(n_per_class=50))
        zz, _ = normalize_zscore(z)
        np.testing.assert_allclose(zz.X, z.X, rtol=0, atol=1e-12)

    def test_transform_reapplies_to_new_points(self):
        d = gen_gaussian_pair(n_per_class=20, seed=4)
        z, norm = normalize_zscore(d)
        np.testing.assert_array_equal(norm.apply(d.X), z.X)
        back = type(norm).from_dict(json.loads(json.dumps(norm.to_dict())))
        np.testing.assert_array_equal(back.apply(d.X), z.X)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 60), st.integers(1, 5))
    def test_moments(self, seed, m, d):
        rng = np.random.default_rng(seed)
        X = rng.normal(size=(m, d)) * rng.uniform(0.1, 100, size=d) + rng.uniform(-50, 50, size=d)
        z, _ = normalize_zscore(Dataset(X, np.arange(m) % 2))
        assert np.all(np.abs(z.X.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(z.X.std(axis=0) - 1) < 1e-9)


class TestGaussianPair:
    def test_zero_variance(self):
        d = gen_gaussian_pair(variance=0.0, n_per_class=5)
        assert np.all(d.X[d.y == 0] == [3.0, 3.0])
        assert np.all(d.X[d.y == 1] == [5.0, 5.0])

    def test_default_shape(self):
        d = gen_gaussian_pair((3, 3), (5, 5), 0.3, 500, seed=1)
        assert (d.m, d.d, d.n_pos, d.n_neg) == (1000, 2, 500, 500)

    def test_deterministic(self):
        assert gen_gaussian_pair(seed=9).X.tobytes() == gen_gaussian_pair(seed=9).X.tobytes()
        assert gen_gaussian_pair(seed=9).digest() != gen_gaussian_pair(seed=10).digest()

    def test_moments_follow_parameters(self):
        d = gen_gaussian_pair(variance=0.5, n_per_class=20000, seed=3)
        np.testing.assert_allclose(d.X[d.y == 1].mean(axis=0), [5, 5], atol=0.03)
        np.testing.assert_allclose(d.X[d.y == 0].var(axis=0), [0.5, 0.5], rtol=0.05)

    def test_negative_variance_rejected(self):
        with pytest.raises(DataError):
            gen_gaussian_pair(variance=-1)


class TestDataset:
    def test_arrays_are_read_only(self):
        d = Dataset(np.zeros((2, 1)) + [[0], [1]], [0, 1])
        with pytest.raises(ValueError):
            d.X[0, 0] = 3

    def test_rejects_too_small(self):
        with pytest.raises(DataError):
            Dataset(np.zeros((1, 2)), [1])

    def test_rejects_nonfinite(self):
        with pytest.raises(DataError, match="row 1, column 0"):
            Dataset(np.array([[0.0], [np.inf]]), [0, 1])

    def test_dedup_conflict_modes(self):
        d = Dataset(np.array([[0.0], [0.0], [1.0], [1.0], [2.0]]), [0, 1, 1, 1, 0])
        sub, kept = deduplicate(d)
        assert kept.tolist() == [2, 4]
        with pytest.raises(DataError, match="rows \\[0\\]"):
            deduplicate(d, conflicts="error")


def _check_stratified(plan, y):
    for cls in (0, 1):
        n_c = int((y == cls).sum())
        counts = np.bincount(plan.assignments[y == cls], minlength=plan.k)
        assert np.all(np.abs(counts - n_c / plan.k) <= 1)


class TestStratifiedKFold:
    def test_exact_divisibility(self):
        d = Dataset(np.arange(10.0)[:, None], [1] * 5 + [0] * 5)
        plan = stratified_kfold(d, 5, seed=2)
        for f in range(5):
            assert sorted(d.y[plan.test_indices(f)].tolist()) == [0, 1]

    def test_appendicitis_ten_folds(self, appendicitis):
        plan = stratified_kfold(appendicitis, 10, seed=0)
        pos = [int(appendicitis.y[plan.test_indices(f)].sum()) for f in range(10)]
        assert set(pos) <= {2, 3} and sum(pos) == 21

    def test_class_smaller_than_k(self):
        d = Dataset(np.arange(4.0)[:, None], [1, 0, 0, 0])
        with pytest.raises(DataError, match="fewer than k=2"):
            stratified_kfold(d, 2)

    def test_k_below_two(self):
        with pytest.raises(DataError):
            stratified_kfold(Dataset(np.arange(4.0)[:, None], [1, 1, 0, 0]), 1)

    def test_deterministic_and_json_roundtrip(self, appendicitis):
        a = stratified_kfold(appendicitis, 5, seed=11)
        b = FoldPlan.from_json(a.to_json())
        assert np.array_equal(a.assignments, stratified_kfold(appendicitis, 5, seed=11).assignments)
        assert (b.k, b.seed) == (5, 11) and np.array_equal(a.assignments, b.assignments)

    def test_splits_partition(self, appendicitis):
        plan = stratified_kfold(appendicitis, 4, seed=1)
        seen = np.concatenate([te for _, te in plan.splits()])
        assert sorted(seen.tolist()) == list(range(appendicitis.m))

    @given(st.integers(2, 12), st.integers(0, 10**6), st.integers(0, 40), st.integers(0, 40))
    def test_stratification_bound(self, k, seed, extra_pos, extra_neg):
        y = np.r_[np.ones(k + extra_pos), np.zeros(k + extra_neg)].astype(np.int8)
        d = Dataset(np.arange(len(y), dtype=float)[:, None], y)
        plan = stratified_kfold(d, k, seed)
        _check_stratified(plan, y)
        assert plan.assignments.min() >= 0 and plan.assignments.max() < k
