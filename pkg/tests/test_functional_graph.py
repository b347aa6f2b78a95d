import numpy as np
import pytest

from conftest import random_graph
from topogap import (
    ActivationMatrix,
    FunctionalGraph,
    apply_metric_correction,
    correlation_distance_matrix,
    export_lower_triangle_csv,
    importance_distribution,
    importance_scores,
    sample_nodes,
    subgraph,
)
from topogap.errors import (
    AlreadyCorrectedError,
    InconsistentScoresError,
    IndexOutOfRangeError,
    SizeTooLargeError,
    TooFewInputsError,
    ZeroVarianceRowError,
)


def make(values):
    values = np.asarray(values, dtype=np.float64)
    return ActivationMatrix(
        values=values, node_ids=tuple(f"n{i}" for i in range(values.shape[0]))
    )


class TestCorrelationDistance:
    def test_perfect_positive_correlation(self):
        g = correlation_distance_matrix(make([[1, 2, 3], [2, 4, 6]]))
        assert g.dissimilarity[0, 1] == 0.0
        assert g.metric_mode == "raw_d"

    def test_perfect_negative_correlation(self):
        g = correlation_distance_matrix(make([[1, 2, 3], [3, 2, 1]]))
        assert g.dissimilarity[0, 1] == 0.0

    def test_uncorrelated_rows(self):
        # centered rows have zero dot product, so |corr| = 0 and d = 1
        g = correlation_distance_matrix(make([[1, 2, 1, 2], [1, 1, 2, 2]]))
        assert g.dissimilarity[0, 1] == 1.0

    def test_too_few_inputs(self):
        with pytest.raises(TooFewInputsError):
            correlation_distance_matrix(make([[1], [2]]))

    def test_zero_variance_recheck(self):
        with pytest.raises(ZeroVarianceRowError):
            correlation_distance_matrix(make([[1, 1, 1], [1, 2, 3]]))

    def test_fuzz_symmetry_diagonal_range(self, rng):
        for _ in range(50):
            n, k = rng.integers(2, 10), rng.integers(3, 20)
            values = rng.standard_normal((n, k))
            g = correlation_distance_matrix(make(values))
            d = g.dissimilarity
            np.testing.assert_allclose(d, d.T, atol=1e-12)
            assert np.all(np.diag(d) == 0)
            assert d.min() >= 0 and d.max() <= 1

    def test_affine_rescaling_invariance(self, rng):
        values = rng.standard_normal((5, 30))
        g1 = correlation_distance_matrix(make(values))
        scaled = values.copy()
        scaled[2] = 3.5 * scaled[2] + 7.0
        g2 = correlation_distance_matrix(make(scaled))
        np.testing.assert_allclose(g1.dissimilarity, g2.dissimilarity, atol=1e-12)


class TestMetricCorrection:
    def test_endpoints_fixed(self):
        d = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.5], [1.0, 0.5, 0.0]])
        g = FunctionalGraph(dissimilarity=d, node_ids=("a", "b", "c"))
        gp = apply_metric_correction(g)
        assert gp.dissimilarity[0, 1] == 0.0
        assert gp.dissimilarity[0, 2] == 1.0
        assert gp.dissimilarity[1, 2] == pytest.approx(0.8660254, abs=1e-7)
        assert gp.metric_mode == "corrected_d_prime"

    def test_double_correction_rejected(self, rng):
        g = apply_metric_correction(random_graph(rng, 4))
        with pytest.raises(AlreadyCorrectedError):
            apply_metric_correction(g)

    def test_monotone_on_unit_interval(self, rng):
        g = random_graph(rng, 8)
        gp = apply_metric_correction(g)
        iu = np.triu_indices(8, k=1)
        d, dp = g.dissimilarity[iu], gp.dissimilarity[iu]
        order = np.argsort(d)
        assert (np.diff(dp[order]) >= -1e-15).all()

    def test_triangle_inequality_after_correction(self, rng):
        m = make(rng.standard_normal((6, 40)))
        gp = apply_metric_correction(correlation_distance_matrix(m))
        d = gp.dissimilarity
        for i in range(6):
            for j in range(6):
                for k in range(6):
                    assert d[i, j] <= d[i, k] + d[k, j] + 1e-12


class TestImportance:
    def test_scores_hand_built(self):
        # inputs 0-2 won by node 1, input 3 by node 0
        values = np.array([
            [1.0, 2.0, 0.5, -9.0],
            [-5.0, 3.0, 2.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
        ])
        np.testing.assert_array_equal(importance_scores(make(values)), [1, 3, 0])

    def test_single_node_takes_all(self):
        np.testing.assert_array_equal(
            importance_scores(make([[1.0, -2.0, 3.0]])), [3]
        )

    def test_tie_breaks_to_lowest_index(self):
        values = np.array([[2.0, 2.0], [2.0, 2.0], [1.0, 1.0]])
        np.testing.assert_array_equal(importance_scores(make(values)), [2, 0, 0])

    def test_distribution_hand_case(self):
        dist = importance_distribution([3, 1, 0], n_inputs=4)
        np.testing.assert_allclose(dist.probabilities, [3 / 5, 1 / 5, 1 / 5])
        assert abs(dist.probabilities.sum() - 1.0) <= 1e-12

    def test_distribution_all_zero_rejected(self):
        with pytest.raises(InconsistentScoresError):
            importance_distribution([0, 0, 0], n_inputs=3)

    def test_distribution_no_zero_scores_renormalized(self):
        dist = importance_distribution([4], n_inputs=4)
        np.testing.assert_allclose(dist.probabilities, [1.0])
        dist = importance_distribution([2, 2], n_inputs=4)
        np.testing.assert_allclose(dist.probabilities, [0.5, 0.5])

    def test_distribution_fuzz(self, rng):
        for _ in range(200):
            n_nodes = int(rng.integers(1, 30))
            n_inputs = int(rng.integers(1, 50))
            values = rng.standard_normal((n_nodes, n_inputs))
            scores = importance_scores(make(values))
            dist = importance_distribution(scores, n_inputs)
            assert abs(dist.probabilities.sum() - 1.0) <= 1e-12
            assert dist.probabilities.min() > 0


class TestSampleNodes:
    def test_full_set(self):
        dist = importance_distribution([2, 1, 1], n_inputs=4)
        idx = sample_nodes(dist, 3, seed=0)
        assert sorted(idx) == [0, 1, 2]

    def test_concentrated_probability(self):
        p = np.array([0.998, 0.001, 0.001])
        dist = importance_distribution([998, 1, 1], n_inputs=1000)
        np.testing.assert_allclose(dist.probabilities, p / p.sum(), atol=1e-6)
        hits = sum(
            sample_nodes(dist, 1, seed=s)[0] == 0 for s in range(10_000)
        )
        assert hits >= 9_900

    def test_deterministic(self):
        dist = importance_distribution([5, 3, 1, 1], n_inputs=10)
        a = sample_nodes(dist, 2, seed=99)
        b = sample_nodes(dist, 2, seed=99)
        np.testing.assert_array_equal(a, b)

    def test_size_too_large(self):
        dist = importance_distribution([1, 1], n_inputs=2)
        with pytest.raises(SizeTooLargeError):
            sample_nodes(dist, 3, seed=0)


class TestSubgraph:
    def test_identity(self, rng):
        g = random_graph(rng, 4)
        out = subgraph(g, [0, 1, 2, 3])
        np.testing.assert_array_equal(out.dissimilarity, g.dissimilarity)

    def test_singleton(self, rng):
        out = subgraph(random_graph(rng, 4), [2])
        assert out.dissimilarity.shape == (1, 1)
        assert out.dissimilarity[0, 0] == 0.0

    def test_pair_entries_preserved(self, rng):
        g = random_graph(rng, 3)
        out = subgraph(g, [0, 2])
        assert out.dissimilarity[0, 1] == g.dissimilarity[0, 2]
        assert out.node_ids == ("0", "2")

    def test_bad_indices(self, rng):
        g = random_graph(rng, 3)
        with pytest.raises(IndexOutOfRangeError):
            subgraph(g, [0, 3])
        with pytest.raises(IndexOutOfRangeError):
            subgraph(g, [1, 1])


def test_lower_triangle_export_round_trip(tmp_path, rng):
    g = random_graph(rng, 5)
    export_lower_triangle_csv(g, tmp_path / "g.csv")
    lines = (tmp_path / "g.csv").read_text().strip().split("\n")
    assert len(lines) == 4
    for i, line in enumerate(lines, start=1):
        row = [float(x) for x in line.split(",")]
        np.testing.assert_array_equal(row, g.dissimilarity[i, :i])
