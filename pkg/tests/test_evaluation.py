import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ggflex import (DataError, ScoreTable, auc, average_ranks, bonferroni_dunn_cd,
                    bonferroni_dunn_q, friedman_test, gen_gaussian_pair, load_score_table,
                    rank_summary, run_benchmark)
from oracles import auc_pairs

TABLE1_RANKS = [6.0588, 3.4706, 4.0, 6.3529, 6.0, 5.7647, 4.4706, 5.2353, 3.6471]


class TestAuc:
    def test_perfect(self):
        assert auc([0.9, 0.8, 0.1], [1, 1, 0]) == 1.0

    def test_all_ties(self):
        assert auc([0.3] * 6, [1, 0, 1, 0, 0, 1]) == 0.5

    def test_hand_example(self):
        assert auc([0.9, 0.8, 0.4, 0.3], [1, 0, 1, 0]) == 0.75

    def test_single_class(self):
        with pytest.raises(DataError):
            auc([0.1, 0.2], [1, 1])

    def test_nonfinite(self):
        with pytest.raises(DataError):
            auc([np.nan, 0.2], [1, 0])

    @given(st.lists(st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]), min_size=2, max_size=40),
           st.integers(0, 2**32 - 1))
    def test_matches_pair_enumeration(self, scores, seed):
        y = np.random.default_rng(seed).integers(0, 2, len(scores))
        y[0], y[1] = 0, 1
        assert auc(scores, y) == pytest.approx(auc_pairs(scores, y), abs=1e-12)

    @given(st.integers(0, 2**32 - 1), st.integers(2, 60))
    def test_monotone_transform_invariance(self, seed, m):
        rng = np.random.default_rng(seed)
        s = rng.choice(np.linspace(-2, 2, 9), size=m)
        y = rng.integers(0, 2, m)
        y[0], y[1] = 0, 1
        base = auc(s, y)
        assert auc(np.exp(3 * s), y) == base
        assert auc(np.arctan(s) + 7, y) == base
        assert auc(s, 1 - y) + base == pytest.approx(1.0, abs=1e-12)


class TestRanks:
    def test_table1_ranks(self, table1_path):
        t = load_score_table(table1_path)
        assert t.scores.shape == (17, 9) and t.unit == "percent"
        np.testing.assert_allclose(average_ranks(t), TABLE1_RANKS, atol=1e-3)

    def test_single_dataset(self):
        t = ScoreTable(("d",), ("a", "b", "c"), np.array([[0.7, 0.9, 0.8]]))
        assert average_ranks(t).tolist() == [3.0, 1.0, 2.0]

    def test_tie(self):
        t = ScoreTable(("d",), ("a", "b", "c"), np.array([[0.9, 0.9, 0.1]]))
        assert average_ranks(t).tolist() == [1.5, 1.5, 3.0]

    def test_missing_cell(self, tmp_path):
        p = tmp_path / "t.csv"
        p.write_text("dataset,a,b\nx,1,\n")
        with pytest.raises(DataError, match="row 2, column 2"):
            load_score_table(p)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 20), st.integers(2, 10))
    def test_rank_sum(self, seed, N, k):
        S = np.random.default_rng(seed).random((N, k))
        R = average_ranks(ScoreTable(tuple(map(str, range(N))), tuple(map(str, range(k))), S))
        assert R.sum() == pytest.approx(k * (k + 1) / 2)
        assert np.all((1 <= R) & (R <= k))


class TestFriedman:
    def test_table1(self, table1_path):
        t = load_score_table(table1_path)
        chi2, F = friedman_test(average_ranks(t), 17, 9)
        assert F == pytest.approx(3.22, abs=0.01)
        assert chi2 > 0

    def test_identical_ranks(self):
        assert friedman_test([2.0, 2.0, 2.0], 5, 3)[0] == 0.0

    def test_hand_table(self):
        # 4 datasets, 3 classifiers; ranks (1,2,3),(1,3,2),(2,1,3),(1,2,3) -> R = (1.25, 2, 2.75)
        chi2, F = friedman_test([1.25, 2.0, 2.75], 4, 3)
        assert chi2 == pytest.approx(12 * 4 / 12 * (1.25**2 + 4 + 2.75**2 - 12), abs=1e-12)
        assert chi2 == pytest.approx(4.5)
        assert F == pytest.approx(3 * 4.5 / (8 - 4.5))

    def test_degenerate(self):
        with pytest.raises(ValueError):
            friedman_test([1.0, 2.0, 3.0], 2, 3)

    def test_preconditions(self):
        with pytest.raises(ValueError):
            friedman_test([1.5, 1.5], 5, 2)


class TestCriticalDifference:
    def test_paper_value(self):
        assert bonferroni_dunn_cd(9, 17, 2.724) == pytest.approx(2.5588, abs=1e-3)

    def test_zero_q(self):
        assert bonferroni_dunn_cd(5, 3, 0.0) == 0.0

    def test_hand(self):
        assert bonferroni_dunn_cd(3, 10, 2.241) == pytest.approx(1.002, abs=1e-3)

    def test_q_table(self):
        assert bonferroni_dunn_q(9, 0.05) == 2.724
        assert bonferroni_dunn_q(2, 0.10) == 1.645
        assert bonferroni_dunn_q(9, 0.05, exact=True) == pytest.approx(2.734, abs=1e-3)
        assert bonferroni_dunn_q(15, 0.05) > bonferroni_dunn_q(10, 0.05)

    def test_summary(self, table1_path):
        s = rank_summary(load_score_table(table1_path), f_critical=2.01)
        assert s.reject_null and s.best == "Random Forest"
        assert s.cd == pytest.approx(2.5588, abs=1e-3)
        assert s.within_cd_of_best[s.classifiers.index("Chipclass")] is False
        assert s.to_dict()["schema_version"] == 1 and "CD=2.5588" in s.to_text()


class TestBenchmark:
    def test_near_separable(self):
        d = gen_gaussian_pair(variance=0.05, n_per_class=40, seed=0)
        r = run_benchmark(d, outer_k=5, inner_k=3, budget=4, seed=0)
        assert r.mean >= 0.99 and len(r.per_fold) == 5 and len(r.chosen_h) == 5

    def test_reproducible_and_anchor(self):
        d = gen_gaussian_pair(variance=0.7, n_per_class=30, seed=2)
        a = run_benchmark(d, outer_k=3, inner_k=3, budget=6, seed=4)
        b = run_benchmark(d, outer_k=3, inner_k=3, budget=6, seed=4)
        assert a.to_dict() == b.to_dict()
        assert all(best >= anc for best, anc in zip(a.inner_best, a.inner_anchor))
        assert a.config["dataset_hash"] == d.digest()
