"""scikit-learn style wrappers around the pipeline stages.

Each transformer accepts a :class:`~mobility_map.cloud.PointCloud` or an
(n, 3) array and returns the same kind of object.
"""

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .cloud import PointCloud, denoise_statistical, range_filter, voxel_downsample
from .config import PipelineConfig
from .normals import estimate_normals
from .pipeline import run_pipeline
from .validation import check_points


def _as_cloud(X):
    if isinstance(X, PointCloud):
        return X, True
    return PointCloud(check_points(X)), False


def _like(cloud, was_cloud):
    return cloud if was_cloud else np.array(cloud.points)


class VoxelGridDownsampler(TransformerMixin, BaseEstimator):
    """Replace the points of each occupied voxel by their centroid."""

    def __init__(self, voxel_edge=0.01):
        self.voxel_edge = voxel_edge

    def fit(self, X, y=None):
        _as_cloud(X)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        cloud, was_cloud = _as_cloud(X)
        return _like(voxel_downsample(cloud, self.voxel_edge), was_cloud)


class RangeFilter(TransformerMixin, BaseEstimator):
    """Keep points within ``max_depth`` meters of the sensor origin."""

    def __init__(self, max_depth=2.0):
        self.max_depth = max_depth

    def fit(self, X, y=None):
        _as_cloud(X)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        cloud, was_cloud = _as_cloud(X)
        return _like(range_filter(cloud, self.max_depth), was_cloud)


class StatisticalOutlierRemoval(TransformerMixin, BaseEstimator):
    """Drop points whose mean k-neighbour distance is more than ``alpha`` deviations from the mean.

    After ``fit`` the statistics of the fitted cloud are in ``stats_``.
    """

    def __init__(self, k=30, alpha=1.0):
        self.k = k
        self.alpha = alpha

    def fit(self, X, y=None):
        cloud, _ = _as_cloud(X)
        _, self.stats_ = denoise_statistical(cloud, self.k, self.alpha)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "stats_")
        cloud, was_cloud = _as_cloud(X)
        filtered, _ = denoise_statistical(cloud, self.k, self.alpha)
        return _like(filtered, was_cloud)


class NormalEstimator(TransformerMixin, BaseEstimator):
    """Per-point unit normals (n, 3), oriented toward ``viewpoint``."""

    def __init__(self, k=30, viewpoint=(0.0, 0.0, 0.0)):
        self.k = k
        self.viewpoint = viewpoint

    def fit(self, X, y=None):
        _as_cloud(X)
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        check_is_fitted(self, "n_features_in_")
        cloud, _ = _as_cloud(X)
        self.field_ = estimate_normals(cloud, k=self.k, viewpoint=self.viewpoint)
        return self.field_.normals


class MobilityMapper(BaseEstimator):
    """Full pipeline as an estimator: ``fit`` builds the map, ``predict`` scores query points.

    A query point takes the score of the nearest point of the reduced cloud.

    Parameters
    ----------
    config : PipelineConfig, optional
    """

    def __init__(self, config=None):
        self.config = config

    def fit(self, X, y=None):
        cloud, _ = _as_cloud(X)
        self.result_ = run_pipeline(cloud, self.config or PipelineConfig())
        self.scores_ = self.result_.point_scores()
        self._tree = cKDTree(self.result_.cloud.points)
        self.n_features_in_ = 3
        return self

    def predict(self, X):
        check_is_fitted(self, "result_")
        pts = check_points(X)
        if len(pts) == 0:
            return np.zeros(0)
        _, nearest = self._tree.query(pts)
        return self.scores_[nearest]

    def report(self, include_timings=False):
        check_is_fitted(self, "result_")
        return self.result_.report(include_timings)
