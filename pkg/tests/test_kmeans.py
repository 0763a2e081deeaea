"""Seeded clustering: determinism, SSE behavior, exhaustive optimality."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kmeans_best_sse_oracle
from tzr.kmeans import kmeans

# Small well-separated instances where the seeded run reaches the global
# optimum; each is checked against exhaustive partition enumeration.
OPTIMALITY_FIXTURES = [
    ([(0, 0), (0, 1), (10, 0), (10, 1)], 2),
    ([(0, 0), (1, 0), (10, 0), (11, 0)], 2),
    ([(0, 0), (0, 1), (1, 0), (1, 1), (20, 20), (20, 21), (21, 20), (21, 21)], 2),
    ([(0, 0), (0.5, 0), (30, 0), (30.5, 0), (60, 10), (60, 10.5)], 3),
    ([(0, 0), (5, 5)], 2),
    ([(2, 3)], 1),
    ([(0, 0), (1, 2), (3, 1), (4, 4), (2, 0)], 1),
    ([(0, 0), (0, 0), (0, 0), (9, 9)], 2),
]


def random_instance(rng):
    n = int(rng.integers(2, 60))
    d = int(rng.integers(1, 4))
    style = int(rng.integers(4))
    if style == 0:
        pts = rng.normal(size=(n, d))
    elif style == 1:
        pts = rng.integers(0, 4, size=(n, d)).astype(float)  # heavy duplicates
    elif style == 2:
        centers = rng.uniform(-50, 50, size=(5, d))
        pts = centers[rng.integers(0, 5, n)] + rng.normal(scale=0.1, size=(n, d))
    else:
        pts = np.repeat(rng.normal(size=(n // 4 + 1, d)), 4, axis=0)[:n]
    k = int(rng.integers(1, min(len(pts), 8) + 1))
    return pts, k


class TestExamples:
    def test_two_well_separated_pairs(self):
        res = kmeans([(0, 0), (0, 1), (10, 0), (10, 1)], k=2, seed=42)
        assert res.sse == pytest.approx(1.0, abs=1e-12)
        assert res.assignments[0] == res.assignments[1]
        assert res.assignments[2] == res.assignments[3]
        assert res.assignments[0] != res.assignments[2]
        got = {tuple(c) for c in np.round(res.centroids, 9)}
        assert got == {(0.0, 0.5), (10.0, 0.5)}

    def test_k1_centroid_is_mean(self):
        pts = np.array([(1, 2), (3, 4), (5, 9), (0, 0)], float)
        res = kmeans(pts, k=1, seed=0)
        assert np.allclose(res.centroids[0], pts.mean(axis=0))

    def test_k_equals_distinct_points_gives_zero_sse(self):
        pts = [(0, 0), (4, 1), (9, 9), (2, 7)]
        res = kmeans(pts, k=4, seed=42)
        assert res.sse == 0.0
        assert sorted(res.assignments) == [0, 1, 2, 3]

    def test_empty_points_rejected(self):
        with pytest.raises(ValueError, match="empty point set"):
            kmeans(np.zeros((0, 2)), k=1)

    def test_k_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            kmeans([(0, 0), (1, 1)], k=3)
        with pytest.raises(ValueError):
            kmeans([(0, 0)], k=0)


class TestDeterminism:
    def test_bit_identical_across_runs(self):
        rng = np.random.default_rng(99)
        pts = rng.normal(size=(40, 2))
        a = kmeans(pts, 5, seed=1234)
        b = kmeans(pts, 5, seed=1234)
        assert np.array_equal(a.assignments, b.assignments)
        assert np.array_equal(a.centroids, b.centroids)
        assert a.sse == b.sse
        assert a.sse_history == b.sse_history

    def test_different_seed_may_differ_but_stays_valid(self):
        rng = np.random.default_rng(5)
        pts = rng.normal(size=(30, 2))
        for seed in (0, 1, 2):
            res = kmeans(pts, 4, seed=seed)
            assert res.assignments.min() >= 0 and res.assignments.max() < 4
            assert np.isfinite(res.centroids).all()


class TestSSE:
    def test_history_non_increasing_on_500_random_instances(self):
        rng = np.random.default_rng(2024)
        for _ in range(500):
            pts, k = random_instance(rng)
            res = kmeans(pts, k, seed=int(rng.integers(10**6)))
            h = res.sse_history
            assert all(b <= a for a, b in zip(h, h[1:])), h

    @pytest.mark.parametrize("pts,k", OPTIMALITY_FIXTURES)
    def test_matches_exhaustive_partition_optimum(self, pts, k):
        res = kmeans(np.array(pts, float), k, seed=42)
        assert res.sse == pytest.approx(kmeans_best_sse_oracle(np.array(pts, float), k), abs=1e-9)

    @given(st.integers(0, 10**6))
    @settings(max_examples=50)
    def test_every_cluster_nonempty(self, seed):
        rng = np.random.default_rng(seed)
        pts, k = random_instance(rng)
        res = kmeans(pts, k, seed=seed)
        assert set(res.assignments) == set(range(k))


class TestEmptyClusterRepair:
    def test_duplicate_points_with_excess_clusters(self):
        # 5 copies of one point plus one outlier, k=3: repair must fire and
        # may cascade; the result must stay finite with all clusters used.
        pts = np.array([(0.0, 0.0)] * 5 + [(1.0, 1.0)])
        res = kmeans(pts, 3, seed=0)
        assert np.isfinite(res.centroids).all()
        assert np.isfinite(res.sse)
        assert set(res.assignments) == {0, 1, 2}

    def test_two_distinct_values_three_clusters(self):
        pts = np.array([(0.0, 0.0), (0.0, 0.0), (9.0, 9.0), (9.0, 9.0)])
        res = kmeans(pts, 3, seed=7)
        assert set(res.assignments) == {0, 1, 2}
        assert np.isfinite(res.sse)
