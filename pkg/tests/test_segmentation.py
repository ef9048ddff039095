import numpy as np
import pytest
from scipy.spatial import cKDTree

from mobility_map.cloud import PointCloud
from mobility_map.errors import ParameterError
from mobility_map.segmentation import (GrowConfig, color_distance, region_grow, rgb_to_ycrcb,
                                       segment_labels, segments_from_labels)
from oracles import connected_components


class TestYCrCb:
    def test_black(self):
        np.testing.assert_allclose(rgb_to_ycrcb([0, 0, 0]), [0, 128, 128])

    def test_white(self):
        np.testing.assert_allclose(rgb_to_ycrcb([255, 255, 255]), [255, 128, 128], atol=1e-9)

    def test_red_is_clamped(self):
        y, cr, cb = rgb_to_ycrcb([255, 0, 0])
        assert y == pytest.approx(76.245)
        assert cr == 255.0
        assert cb == pytest.approx(128 - 76.245 * 0.564)

    def test_vectorised(self, rng):
        rgb = rng.integers(0, 256, (20, 3))
        np.testing.assert_allclose(rgb_to_ycrcb(rgb), [rgb_to_ycrcb(c) for c in rgb])

    def test_out_of_range(self):
        with pytest.raises(ParameterError):
            rgb_to_ycrcb([256, 0, 0])


class TestColorDistance:
    def test_identical(self):
        assert color_distance([10, 20, 30], [10, 20, 30]) == 0.0

    def test_single_axis(self):
        assert color_distance([0, 128, 128], [255, 128, 128]) == 255.0

    def test_random_pairs(self, rng):
        a = rng.random((50, 3)) * 255
        b = rng.random((50, 3)) * 255
        want = [np.sqrt(sum((x - y) ** 2 for x, y in zip(p, q))) for p, q in zip(a, b)]
        np.testing.assert_allclose(color_distance(a, b), want, rtol=1e-12)


def _patch(rng, n, x0, y0, size=0.3, z=1.0):
    xy = rng.uniform(0, size, (n, 2)) + [x0, y0]
    return np.column_stack([xy, np.full(n, z)])


def _check_partition(segments, n, exclude=None):
    seen = np.zeros(n, dtype=int)
    for seg in segments:
        assert len(seg) > 0
        assert np.all(np.diff(seg.indices) > 0)
        seen[seg.indices] += 1
    assert seen.max() <= 1
    free = np.ones(n, bool) if exclude is None else ~exclude
    np.testing.assert_array_equal(seen == 1, free)


class TestRegionGrow:
    def test_single_color_plane(self, rng):
        pts = _patch(rng, 2000, 0, 0, size=0.4)
        cloud = PointCloud(pts, np.full((2000, 3), 90))
        segments = region_grow(cloud, cfg=GrowConfig(radius=0.03))
        assert len(segments) == 1
        assert len(segments[0]) == 2000

    def test_disjoint_patches_match_connectivity_oracle(self, rng):
        pts = np.vstack([_patch(rng, 800, 0, 0), _patch(rng, 800, 0.5, 0)])
        cloud = PointCloud(pts, np.full((1600, 3), 90))
        cfg = GrowConfig(radius=0.03)
        segments = region_grow(cloud, cfg=cfg)
        edges = cKDTree(pts).query_pairs(0.03)
        comp = connected_components(len(pts), edges)
        assert len(segments) == len(np.unique(comp)) == 2
        for seg in segments:
            assert len(np.unique(comp[seg.indices])) == 1
        _check_partition(segments, len(pts))

    def test_color_boundary_splits(self, rng):
        pts = _patch(rng, 2000, 0, 0, size=0.4)
        colors = np.where(pts[:, :1] < 0.2, [[200, 30, 30]], [[30, 30, 200]])
        segments = region_grow(PointCloud(pts, colors), cfg=GrowConfig(radius=0.03))
        assert len(segments) == 2
        for seg in segments:
            assert len(np.unique(colors[seg.indices], axis=0)) == 1

    def test_threshold_is_a_strict_bound(self):
        pts = np.array([[0, 0, 1], [0.01, 0, 1]], dtype=float)
        colors = np.array([[100, 100, 100], [104, 100, 100]])
        d = color_distance(*rgb_to_ycrcb(colors))
        joined = region_grow(PointCloud(pts, colors), cfg=GrowConfig(d * (1 + 1e-9), 0.02, 1))
        split = region_grow(PointCloud(pts, colors), cfg=GrowConfig(d, 0.02, 1))
        assert len(joined) == 1
        assert len(split) == 2

    def test_exclude_and_undersized(self, rng):
        pts = _patch(rng, 500, 0, 0)
        colors = np.full((500, 3), 50)
        exclude = np.zeros(500, bool)
        exclude[:50] = True
        segments = region_grow(PointCloud(pts, colors), cfg=GrowConfig(radius=0.01, min_size=30),
                               exclude=exclude)
        _check_partition(segments, 500, exclude)
        for seg in segments:
            assert seg.undersized == (len(seg) < 30)

    def test_seeded_determinism(self, rng):
        pts = rng.random((1500, 3)) * 0.3
        colors = rng.integers(0, 256, (1500, 3))
        cloud = PointCloud(pts, colors)
        a = region_grow(cloud, cfg=GrowConfig(radius=0.03, seed=4))
        b = region_grow(cloud, cfg=GrowConfig(radius=0.03, seed=4))
        assert [s.indices.tolist() for s in a] == [s.indices.tolist() for s in b]

    def test_needs_colors(self, rng):
        with pytest.raises(ParameterError):
            region_grow(PointCloud(rng.random((5, 3))))

    def test_empty(self):
        assert region_grow(PointCloud(np.zeros((0, 3)), np.zeros((0, 3)))) == []


def test_labels_round_trip():
    labels = np.array([1, -1, 0, 1, 2, 0, -1])
    segments = segments_from_labels(labels, min_size=2)
    assert [s.indices.tolist() for s in segments] == [[2, 5], [0, 3], [4]]
    assert [s.undersized for s in segments] == [False, False, True]
    np.testing.assert_array_equal(segment_labels(segments, len(labels)), labels)


@pytest.mark.parametrize("kwargs", [{"color_threshold": 0}, {"radius": -1}, {"min_size": 0}])
def test_config_domain(kwargs):
    with pytest.raises(ParameterError):
        GrowConfig(**kwargs)
