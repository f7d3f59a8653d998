from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from texsim import retrieval as rt
from texsim.errors import ConfigurationError, DegenerateLabelsError, IncompatibleError
from texsim.similarity import SimilarityScore


def retrieval_with_ranks(ranks, n=10):
    """A single query whose relevant items sit at the given 1-based ranks."""
    relevant = np.zeros(n, dtype=bool)
    relevant[np.asarray(ranks) - 1] = True
    return rt.RankedRetrieval(0, np.arange(1, n + 1), relevant)


def sort_oracle(scores, i, higher=True):
    others = [j for j in range(len(scores)) if j != i]
    sign = -1 if higher else 1
    return sorted(others, key=lambda j: (sign * scores[i][j], j))


class TestLayout:
    def test_from_labels(self):
        layout = rt.DatasetLayout.from_labels(["a", "a", "b", "b", "c", "c"])
        assert layout.class_count == 3 and layout.samples_per_class == 2 and len(layout) == 6
        assert layout.entries[3] == ("b", 1, 3)

    def test_unequal_classes(self):
        with pytest.raises(ConfigurationError):
            rt.DatasetLayout.from_labels(["a", "a", "b"])

    def test_empty(self):
        with pytest.raises(ConfigurationError):
            rt.DatasetLayout([])


class TestRanking:
    def test_perfect_separation(self):
        labels = [0, 0, 1, 1]
        scores = np.array([[1, 0.9, 0.1, 0.2], [0.9, 1, 0.3, 0.1], [0.1, 0.3, 1, 0.8], [0.2, 0.1, 0.8, 1]])
        rets = rt.rank_queries(scores, labels)
        assert all(r.relevant[0] for r in rets)
        assert [r.ranking[0] for r in rets] == [1, 0, 3, 2]

    def test_list_length(self, rng):
        rets = rt.rank_queries(rng.random((6, 6)), [0, 0, 1, 1, 2, 2])
        assert all(r.ranking.size == 5 and r.query not in r.ranking for r in rets)

    def test_hand_built_3x3(self):
        scores = [[0, 0.4, 0.7], [0.4, 0, 0.4], [0.7, 0.4, 0]]
        rets = rt.rank_queries(np.array(scores), ["x", "y", "x"])
        for r in rets:
            assert list(r.ranking) == sort_oracle(scores, r.query)

    def test_ties_by_index(self):
        scores = np.ones((4, 4))
        rets = rt.rank_queries(scores, [0, 0, 1, 1])
        assert list(rets[2].ranking) == [0, 1, 3]

    def test_distance_order(self):
        d = np.array([[0, 5, 1], [5, 0, 2], [1, 2, 0]], dtype=float)
        rets = rt.rank_queries(d, [0, 1, 0], higher_is_better=False)
        assert list(rets[0].ranking) == [2, 1]

    @settings(max_examples=50)
    @given(st.integers(0, 2**32 - 1))
    def test_random_against_sort_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = 8
        s = rng.integers(0, 4, (n, n)).astype(float)
        s = (s + s.T) / 2
        for higher in (True, False):
            rets = rt.rank_queries(s, [i // 2 for i in range(n)], higher)
            for r in rets:
                assert list(r.ranking) == sort_oracle(s.tolist(), r.query, higher)

    def test_run_experiment_with_measure(self):
        items = [0.0, 0.1, 5.0, 5.2]
        layout = rt.DatasetLayout.from_labels([0, 0, 1, 1])
        measure = lambda a, b: SimilarityScore(abs(a - b), "distance")  # noqa: E731
        rets = rt.run_experiment(items, layout, measure)
        assert [r.ranking[0] for r in rets] == [1, 0, 3, 2]
        with pytest.raises(IncompatibleError):
            rt.run_experiment(items[:3], layout, measure)


class TestMetrics:
    def test_p_at_1(self):
        assert rt.precision_at_1([retrieval_with_ranks([1])] * 3) == 1.0
        assert rt.precision_at_1([retrieval_with_ranks([2])] * 3) == 0.0

    def test_mrr_example(self):
        rets = [retrieval_with_ranks([r]) for r in (1, 2, 4)]
        assert rt.mean_reciprocal_rank(rets) == pytest.approx(float(Fraction(7, 12)), abs=1e-15)

    def test_mrr_no_relevant(self):
        with pytest.raises(ConfigurationError):
            rt.mean_reciprocal_rank([rt.RankedRetrieval(0, np.arange(3), np.zeros(3, bool))])

    def test_ap_examples(self):
        assert rt.average_precision([1, 2, 3], 4) == 1.0
        assert rt.average_precision([1, 3, 5], 4) == pytest.approx(float(Fraction(34, 45)), abs=1e-15)

    def test_ap_wrong_count(self):
        with pytest.raises(ConfigurationError):
            rt.average_precision([1, 2], 4)

    def test_map_perfect_iff_classmates_on_top(self):
        labels = [0, 0, 0, 1, 1, 1]
        s = np.array([[1.0 if a == b else 0.0 for b in labels] for a in labels])
        assert rt.mean_average_precision(rt.rank_queries(s, labels), 3)[0] == 1.0
        s[0, 3] = s[3, 0] = 2.0
        assert rt.mean_average_precision(rt.rank_queries(s, labels), 3)[0] < 1.0


class TestROC:
    def test_perfect(self):
        points, auc = rt.roc_from_scores([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0])
        assert auc == 1.0
        assert points[0].tolist() == [0, 0] and points[-1].tolist() == [1, 1]

    def test_constant_scores(self):
        _, auc = rt.roc_from_scores(np.full(10, 0.3), [1, 0] * 5)
        assert auc == 0.5

    def test_degenerate(self):
        with pytest.raises(DegenerateLabelsError):
            rt.roc_from_scores([0.1, 0.2], [1, 1])

    def test_monotone(self, rng):
        points, _ = rt.roc_from_scores(rng.integers(0, 5, 40), rng.random(40) < 0.3)
        assert np.all(np.diff(points[:, 0]) >= 0) and np.all(np.diff(points[:, 1]) >= 0)

    def test_matches_brute_force(self, rng):
        for _ in range(50):
            n = int(rng.integers(4, 30))
            pos = rng.random(n) < 0.4
            pos[0], pos[1] = True, False
            scores = rng.integers(0, 6, n).astype(float)
            _, auc = rt.roc_from_scores(scores, pos)
            assert abs(auc - rt.brute_force_auc(scores, pos)) < 1e-9

    def test_unordered_pairs(self):
        labels = [0, 0, 1, 1]
        s = np.array([[0, 3, 1, 0], [3, 0, 2, 1], [1, 2, 0, 4], [0, 1, 4, 0]], dtype=float)
        values, positive = rt.pair_scores(s, labels)
        assert values.tolist() == [3, 1, 0, 2, 1, 4]
        assert positive.tolist() == [True, False, False, False, False, True]

    def test_distance_negated(self):
        labels = [0, 0, 1, 1]
        d = np.array([[0, 1, 5, 6], [1, 0, 7, 5], [5, 7, 0, 2], [6, 5, 2, 0]], dtype=float)
        assert rt.roc_curve(d, labels, higher_is_better=False)[1] == 1.0


class TestEvaluate:
    def test_perfect(self):
        labels = [0, 0, 1, 1, 2, 2]
        s = np.array([[1.0 if a == b else 0.1 for b in labels] for a in labels])
        rep = rt.evaluate(s, labels)
        assert (rep.p_at_1, rep.mrr, rep.map, rep.auc) == (1.0, 1.0, 1.0, 1.0)
        assert len(rep.per_query_ap) == 6

    def test_configuration_errors(self):
        with pytest.raises(ConfigurationError):
            rt.evaluate(np.ones((2, 2)), [0, 0])
        with pytest.raises(ConfigurationError):
            rt.evaluate(np.ones((2, 2)), [0, 1])

    def test_metric_range(self, rng):
        s = rng.random((12, 12))
        s = s + s.T
        rep = rt.evaluate(s, [i // 3 for i in range(12)])
        for value in (rep.p_at_1, rep.mrr, rep.map, rep.auc):
            assert 0.0 <= value <= 1.0
