"""Point-cloud container, spatial index and the data-reduction filters."""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _gridknn
from .errors import InsufficientDataError, ParameterError
from .validation import check_count, check_points, check_positive, check_vector3


class PointCloud:
    """Immutable ordered set of 3D points with optional 8-bit RGB colors.

    Parameters
    ----------
    points : array-like of shape (n, 3)
        Finite coordinates in meters.
    colors : array-like of shape (n, 3), optional
        Per-point RGB triples in ``[0, 255]``.
    """

    __slots__ = ("points", "colors")

    def __init__(self, points, colors=None):
        points = check_points(points, name="points")
        points = np.array(points, dtype=np.float64, copy=True)
        points.flags.writeable = False
        if colors is not None:
            colors = np.asarray(colors)
            if colors.shape != (len(points), 3):
                raise ParameterError(
                    f"colors must have shape ({len(points)}, 3), got {colors.shape}")
            if np.any(colors < 0) or np.any(colors > 255):
                raise ParameterError("colors must lie in [0, 255]")
            colors = np.array(colors, dtype=np.uint8, copy=True)
            colors.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "colors", colors)

    def __setattr__(self, name, value):
        raise AttributeError("PointCloud is immutable")

    @classmethod
    def from_raw(cls, points, colors=None):
        """Build a cloud from sensor data, dropping rows with NaN/Inf coordinates."""
        points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        keep = np.all(np.isfinite(points), axis=1)
        if colors is not None:
            colors = np.asarray(colors).reshape(-1, 3)[keep]
        return cls(points[keep], colors)

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)))

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"PointCloud(n={len(self)}, colors={self.colors is not None})"

    @property
    def has_colors(self):
        return self.colors is not None

    def select(self, indices):
        """Sub-cloud with the given indices (or boolean mask), order preserved."""
        indices = np.asarray(indices)
        colors = None if self.colors is None else self.colors[indices]
        return PointCloud(self.points[indices], colors)

    def with_colors(self, colors):
        return PointCloud(self.points, colors)


@dataclass(frozen=True)
class DenoiseStats:
    """Per-point mean neighbour distance and its cloud-wide mean and deviation."""

    mean_distances: np.ndarray
    mu: float
    sigma: float
    alpha: float = 1.0

    @property
    def bounds(self):
        """Closed interval of accepted mean distances."""
        return self.mu - self.alpha * self.sigma, self.mu + self.alpha * self.sigma


def _as_points(cloud):
    return cloud.points if isinstance(cloud, PointCloud) else check_points(cloud)


class SpatialIndex:
    """Nearest-neighbour and fixed-radius queries over a fixed set of points.

    Results match a brute-force scan exactly; equal distances are ordered by
    the lower point index.
    """

    def __init__(self, cloud):
        points = np.array(_as_points(cloud), dtype=np.float64)
        points.flags.writeable = False
        self.points = points
        self._tree = None

    def __len__(self):
        return len(self.points)

    @property
    def tree(self):
        if self._tree is None:
            self._tree = cKDTree(self.points)
        return self._tree

    def knn(self, query, k):
        """Indices of the ``k`` nearest points to ``query``, ascending by distance."""
        query = check_vector3(query, "query")
        k = check_count(k, "k")
        if k > len(self):
            raise ParameterError(f"k={k} exceeds the index size {len(self)}")
        dist, _ = self.tree.query(query, k=k)
        radius = float(np.atleast_1d(dist)[-1]) * (1.0 + 1e-12) + 1e-300
        cand = np.asarray(self.tree.query_ball_point(query, radius), dtype=np.int64)
        d2 = ((self.points[cand] - query) ** 2).sum(axis=1)
        return cand[np.lexsort((cand, d2))[:k]]

    def radius(self, query, r):
        """Sorted indices of all points within distance ``r`` (inclusive) of ``query``."""
        query = check_vector3(query, "query")
        r = check_positive(r, "r")
        cand = np.asarray(self.tree.query_ball_point(query, r), dtype=np.int64)
        cand.sort()
        return cand

    def knn_all(self, k, *, exclude_self=True):
        """Neighbour table ``(distances, indices)`` of shape (n, k) for every indexed point.

        With ``exclude_self`` each point's own index is left out of its row.
        """
        k = check_count(k, "k")
        need = k + 1 if exclude_self else k
        if len(self) < need:
            raise InsufficientDataError(f"need at least {need} points for k={k}, got {len(self)}")
        d, i, _ = _gridknn.all_knn(self.points, k, exclude_self=exclude_self)
        return d, i

    def mean_knn_distance(self, k):
        """Mean distance from every point to its ``k`` nearest other points."""
        k = check_count(k, "k")
        if len(self) < k + 1:
            raise InsufficientDataError(f"need at least {k + 1} points for k={k}, got {len(self)}")
        return _gridknn.all_knn(self.points, k, exclude_self=True, want_neighbors=False,
                                )[2]

    def radius_all(self, r):
        """For every indexed point, the sorted indices within distance ``r`` (self included)."""
        r = check_positive(r, "r")
        lists = self.tree.query_ball_point(self.points, r, return_sorted=True)
        return [np.asarray(nb, dtype=np.int64) for nb in lists]


def voxel_downsample(cloud, voxel_edge):
    """Replace the points of every occupied voxel by their centroid.

    Voxels are axis-aligned cubes anchored at the origin (``floor(coord / edge)``).
    Colors are averaged per voxel and rounded half-up.  Output is ordered by
    voxel key.
    """
    voxel_edge = check_positive(voxel_edge, "voxel_edge")
    if len(cloud) == 0:
        return PointCloud.empty() if cloud.colors is None else cloud
    pts = cloud.points
    cells = np.floor(pts / voxel_edge).astype(np.int64)
    cells -= cells.min(axis=0)
    dims = cells.max(axis=0) + 1
    keys = (cells[:, 0] * dims[1] + cells[:, 1]) * dims[2] + cells[:, 2]
    _, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
    inverse = inverse.ravel()
    centroids = np.empty((len(counts), 3))
    for axis in range(3):
        centroids[:, axis] = np.bincount(inverse, weights=pts[:, axis]) / counts
    colors = None
    if cloud.colors is not None:
        colors = np.empty((len(counts), 3), dtype=np.uint8)
        for axis in range(3):
            mean = np.bincount(inverse, weights=cloud.colors[:, axis].astype(np.float64)) / counts
            colors[:, axis] = np.floor(mean + 0.5)
    return PointCloud(centroids, colors)


def range_filter(cloud, max_depth):
    """Keep points whose distance from the sensor origin is at most ``max_depth``."""
    max_depth = check_positive(max_depth, "max_depth")
    dist = np.sqrt((cloud.points ** 2).sum(axis=1))
    return cloud.select(np.flatnonzero(dist <= max_depth))


def denoise_statistical(cloud, k=30, alpha=1.0, index=None):
    """Statistical outlier removal.

    Each point's mean distance to its ``k`` nearest neighbours is compared to the
    cloud-wide mean ``mu`` and standard deviation ``sigma`` of that quantity;
    points outside ``[mu - alpha*sigma, mu + alpha*sigma]`` are dropped.

    Returns
    -------
    filtered : PointCloud
    stats : DenoiseStats
    """
    k = check_count(k, "k")
    alpha = check_positive(alpha, "alpha")
    if len(cloud) < k + 1:
        raise InsufficientDataError(
            f"statistical denoising with k={k} needs at least {k + 1} points, got {len(cloud)}")
    index = index if index is not None else SpatialIndex(cloud)
    dbar = index.mean_knn_distance(k)
    mu = float(dbar.mean())
    sigma = float(dbar.std())
    # a few ulps of slack so rounding in equal distances cannot drop points when sigma ~ 0
    band = alpha * sigma + 64.0 * np.finfo(float).eps * mu
    keep = np.abs(dbar - mu) <= band
    return cloud.select(np.flatnonzero(keep)), DenoiseStats(dbar, mu, sigma, alpha)
