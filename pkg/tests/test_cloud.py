import numpy as np
import pytest

from mobility_map.cloud import (PointCloud, SpatialIndex, denoise_statistical, range_filter,
                                voxel_downsample)
from mobility_map.errors import InsufficientDataError, ParameterError
from oracles import brute_knn, brute_mean_knn


class TestPointCloud:
    def test_rejects_non_finite(self):
        with pytest.raises(ParameterError):
            PointCloud([[0.0, np.nan, 1.0]])

    def test_from_raw_drops_invalid_rows(self):
        pts = np.array([[0, 0, 1], [np.nan, 0, 1], [0, np.inf, 2], [1, 1, 1]], dtype=float)
        colors = np.array([[1, 2, 3], [4, 5, 6], [7, 8, 9], [10, 11, 12]])
        cloud = PointCloud.from_raw(pts, colors)
        assert len(cloud) == 2
        np.testing.assert_array_equal(cloud.colors, [[1, 2, 3], [10, 11, 12]])

    def test_colors_must_be_parallel(self):
        with pytest.raises(ParameterError):
            PointCloud(np.zeros((3, 3)), np.zeros((2, 3)))
        with pytest.raises(ParameterError):
            PointCloud(np.zeros((1, 3)), [[256, 0, 0]])

    def test_immutable(self):
        cloud = PointCloud(np.zeros((2, 3)))
        with pytest.raises(AttributeError):
            cloud.points = None
        with pytest.raises(ValueError):
            cloud.points[0, 0] = 1.0

    def test_empty(self):
        assert len(PointCloud.empty()) == 0


class TestVoxel:
    def test_two_points_share_a_cell(self):
        out = voxel_downsample(PointCloud([[0.001, 0, 0], [0.009, 0, 0]]), 0.01)
        np.testing.assert_allclose(out.points, [[0.005, 0, 0]], atol=1e-15)

    def test_empty_is_identity(self):
        assert len(voxel_downsample(PointCloud.empty(), 0.01)) == 0

    def test_grid_count_matches_bucket_oracle(self):
        # 2 mm lattice offset off the cell boundaries
        g = (np.arange(100) * 0.002) + 0.0005
        X, Y = np.meshgrid(g, g)
        pts = np.column_stack([X.ravel(), Y.ravel(), np.full(X.size, 0.0005)])
        out = voxel_downsample(PointCloud(pts), 0.01)
        buckets = {tuple(c) for c in np.floor(pts / 0.01).astype(int)}
        assert len(out) == len(buckets) == 400

    def test_centroid_not_cell_center(self, rng):
        pts = rng.random((500, 3)) * 0.05
        out = voxel_downsample(PointCloud(pts), 0.01)
        cells = np.floor(pts / 0.01).astype(int)
        expected = {}
        for c, p in zip(map(tuple, cells), pts):
            expected.setdefault(c, []).append(p)
        got = sorted(map(tuple, np.round(out.points, 12)))
        want = sorted(tuple(np.round(np.mean(v, axis=0), 12)) for v in expected.values())
        assert got == want

    def test_colors_are_averaged(self):
        cloud = PointCloud([[0.001, 0, 0], [0.002, 0, 0]], [[0, 10, 255], [1, 20, 255]])
        out = voxel_downsample(cloud, 0.01)
        np.testing.assert_array_equal(out.colors, [[1, 15, 255]])

    def test_bad_edge(self):
        with pytest.raises(ParameterError):
            voxel_downsample(PointCloud(np.zeros((1, 3))), 0.0)


class TestRangeFilter:
    def test_simple(self):
        out = range_filter(PointCloud([[0, 0, 1], [0, 0, 3]]), 2.0)
        np.testing.assert_array_equal(out.points, [[0, 0, 1]])

    def test_all_within_is_identity(self, rng):
        cloud = PointCloud(rng.random((50, 3)))
        np.testing.assert_array_equal(range_filter(cloud, 10.0).points, cloud.points)

    def test_matches_brute_force(self, rng):
        pts = rng.uniform(-2, 2, (1000, 3))
        out = range_filter(PointCloud(pts), 1.5)
        want = [p for p in pts if np.sqrt(p @ p) <= 1.5]
        np.testing.assert_array_equal(out.points, want)

    def test_idempotent(self, rng):
        once = range_filter(PointCloud(rng.uniform(-2, 2, (300, 3))), 1.0)
        np.testing.assert_array_equal(range_filter(once, 1.0).points, once.points)


class TestDenoise:
    def test_zero_variance_keeps_everything(self):
        # every point of a regular ring has the same neighbourhood, so sigma = 0
        t = np.linspace(0, 2 * np.pi, 60, endpoint=False)
        ring = np.column_stack([np.cos(t), np.sin(t), np.zeros_like(t)])
        for alpha in (0.1, 1.0, 3.0):
            out, stats = denoise_statistical(PointCloud(ring), k=4, alpha=alpha)
            assert len(out) == len(ring)
            assert stats.sigma == pytest.approx(0.0, abs=1e-12)

    def test_far_point_removed(self):
        g = np.arange(10) * 0.01
        X, Y = np.meshgrid(g, g)
        pts = np.column_stack([X.ravel(), Y.ravel(), np.zeros(100)])
        pts = np.vstack([pts, [0.05, 0.05, 1.0]])
        out, stats = denoise_statistical(PointCloud(pts), k=8, alpha=1.0)
        dbar = brute_mean_knn(pts, 8)
        mu, sigma = dbar.mean(), dbar.std()
        expected = np.flatnonzero(np.abs(dbar - mu) <= sigma)
        np.testing.assert_allclose(stats.mean_distances, dbar, rtol=1e-12)
        assert stats.mu == pytest.approx(mu, rel=1e-12)
        np.testing.assert_array_equal(out.points, pts[expected])
        assert len(out) == 100
        assert not np.any(out.points[:, 2] > 0.5)

    def test_exactly_equal_distances(self):
        corners = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], float)
        out, stats = denoise_statistical(PointCloud(corners), k=3, alpha=1e-6)
        assert stats.sigma == 0.0
        assert len(out) == 8

    def test_second_pass_removes_no_more(self, rng):
        pts = np.column_stack([rng.random((2000, 2)), rng.normal(0, 0.002, 2000)])
        cloud = PointCloud(pts)
        first, _ = denoise_statistical(cloud, k=10, alpha=1.0)
        second, _ = denoise_statistical(first, k=10, alpha=1.0)
        assert len(first) - len(second) <= len(cloud) - len(first)

    def test_second_pass_after_outlier_removal_can_remove_more(self, rng):
        # sparse outliers inflate sigma, so the first pass only drops them;
        # the second pass then trims the now-unimodal distribution
        pts = np.column_stack([rng.random((2000, 2)), rng.normal(0, 0.002, 2000)])
        cloud = PointCloud(np.vstack([pts, rng.random((50, 3))]))
        first, _ = denoise_statistical(cloud, k=10, alpha=1.0)
        second, _ = denoise_statistical(first, k=10, alpha=1.0)
        assert len(first) - len(second) > len(cloud) - len(first)

    def test_stats_invariants(self, rng):
        _, stats = denoise_statistical(PointCloud(rng.random((200, 3))), k=5, alpha=2.0)
        assert stats.sigma >= 0
        assert stats.mu == pytest.approx(stats.mean_distances.mean())
        lo, hi = stats.bounds
        assert hi - lo == pytest.approx(4 * stats.sigma)

    def test_too_few_points(self):
        with pytest.raises(InsufficientDataError):
            denoise_statistical(PointCloud(np.zeros((5, 3))), k=5)


class TestSpatialIndex:
    def test_query_at_indexed_point(self, rng):
        pts = rng.random((50, 3))
        assert SpatialIndex(pts).knn(pts[17], 1)[0] == 17

    def test_collinear(self):
        pts = np.array([[x, 0, 0] for x in (0.0, 1.0, 2.0, 3.0)])
        assert list(SpatialIndex(pts).knn([0.4, 0, 0], 2)) == [0, 1]

    def test_knn_matches_brute_force(self, rng):
        pts = rng.random((500, 3))
        index = SpatialIndex(pts)
        for q in rng.random((20, 3)):
            _, want = brute_knn(pts, q[None], 10)
            np.testing.assert_array_equal(index.knn(q, 10), want[0])

    def test_ties_go_to_lower_index(self):
        pts = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [5, 5, 5]], dtype=float)
        assert list(SpatialIndex(pts).knn([0, 0, 0], 3)) == [0, 1, 2]

    def test_knn_all_matches_brute_force(self, rng):
        # lattice points give many exact ties
        g = np.arange(6) * 0.1
        X, Y, Z = np.meshgrid(g, g, g)
        pts = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])
        index = SpatialIndex(pts)
        for exclude in (True, False):
            d, i = index.knn_all(7, exclude_self=exclude)
            want_d, want_i = brute_knn(pts, pts, 7, exclude_self=exclude)
            np.testing.assert_array_equal(i, want_i)
            np.testing.assert_allclose(d, want_d, rtol=1e-12)

    def test_radius_matches_brute_force(self, rng):
        pts = rng.random((300, 3))
        q = np.array([0.5, 0.5, 0.5])
        want = np.flatnonzero(np.sqrt(((pts - q) ** 2).sum(axis=1)) <= 0.2)
        np.testing.assert_array_equal(SpatialIndex(pts).radius(q, 0.2), want)

    def test_k_too_large(self):
        with pytest.raises(ParameterError):
            SpatialIndex(np.zeros((3, 3))).knn([0, 0, 0], 4)
